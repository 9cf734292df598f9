"""Hausdorff distance from K-center DBSCAN++ cores to a level set of a two-Gaussian mixture."""

from _common import parser, save

from dbscanpp import bench
from dbscanpp.cli import default_levelset_spec

p = parser(__doc__, "levelset")
p.add_argument("--sizes", default="1000,4000,16000")
p.add_argument("--lam", type=float, default=0.04)
p.add_argument("--m", default="minimax", help="minimax, n, or an integer")
args = p.parse_args()

m = args.m if args.m in ("minimax", "n") else int(args.m)
sizes = [int(s) for s in args.sizes.split(",")]
save(bench.run_levelset_experiment(default_levelset_spec(), args.lam, sizes, m=m), args.out, "levelset")
