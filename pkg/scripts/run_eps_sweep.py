"""Robustness width of DBSCAN and DBSCAN++ over a 30-point epsilon grid, one table per seed."""

import numpy as np
from _common import parser, save

from dbscanpp import bench
from dbscanpp.data import generate

p = parser(__doc__, "eps_sweep")
p.add_argument("--n", type=int, default=5000)
p.add_argument("--seeds", default="0,1,2")
p.add_argument("--ratio", type=float, default=0.1)
args = p.parse_args()

for seed in (int(s) for s in args.seeds.split(",")):
    ds = generate("gauss2x2d", args.n, seed)
    table = bench.run_epsilon_sweep(ds, np.linspace(4 / 30, 4, 30), 10, ratio=args.ratio, seed=seed)
    save(table, f"{args.out}_seed{seed}", "eps-sweep")
