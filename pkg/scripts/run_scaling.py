"""Runtime of DBSCAN and both DBSCAN++ strategies on gauss4x3d with fixed m."""

from _common import parser, save

from dbscanpp import bench

p = parser(__doc__, "scaling")
p.add_argument("--sizes", default="1000,4000,16000,64000")
p.add_argument("--eps", type=float, default=0.5)
p.add_argument("--m", type=int, default=500)
p.add_argument("--repeats", type=int, default=3)
args = p.parse_args()

sizes = [int(s) for s in args.sizes.split(",")]
bench.warm_up(bench.ALGORITHMS, args.eps, 10)
save(bench.run_scaling_experiment("gauss4x3d", sizes, args.eps, m=args.m, repeats=args.repeats), args.out, "scaling")
