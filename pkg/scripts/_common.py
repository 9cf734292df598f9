import argparse
import json

from dbscanpp import bench
from dbscanpp.cli import _write_table


def parser(doc: str, default_out: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=doc, formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--out", default=f"results/{default_out}", help="output prefix for .csv/.jsonl/.plot.csv")
    return p


def save(table: bench.BenchTable, prefix: str, kind: str) -> None:
    _write_table(table, prefix, kind, timings=True)
    print(json.dumps(table.summary, indent=2, sort_keys=True, default=str))
