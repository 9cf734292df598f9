"""Score and noise against m/n on gauss2x2d, at the epsilon that maximises DBSCAN ARI."""

import numpy as np
from _common import parser, save

from dbscanpp import bench
from dbscanpp.data import generate

p = parser(__doc__, "tradeoff")
p.add_argument("--n", type=int, default=5000)
p.add_argument("--seed", type=int, default=0)
args = p.parse_args()

ds = generate("gauss2x2d", args.n, args.seed)
tuning = bench.run_epsilon_sweep(ds, np.linspace(4 / 30, 4, 30), 10, algorithms=["dbscan"])
eps = max(tuning.records, key=lambda r: r.ari).epsilon
print(f"tuned eps={eps:.4f}")
ratios = [0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 1.0]
save(bench.run_tradeoff_sweep(ds, ratios, eps, 10, seed=args.seed), args.out, "tradeoff")
