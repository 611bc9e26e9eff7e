"""Least-norm oracle against the integral operator at increasing grid sizes."""
import argparse
import json
import time

from canondbar.forms import builtin_form
from canondbar.oracle import compare_with_tilde
from canondbar.workflows import parse_domains


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--domains", default="disc,disc")
    ap.add_argument("--form", default="poly2")
    ap.add_argument("--grids", default="16,32,64")
    a = ap.parse_args()
    pd, f = parse_domains(a.domains), builtin_form(a.form)
    rows = []
    for g in map(int, a.grids.split(",")):
        t0 = time.perf_counter()
        rec = compare_with_tilde(pd, f, g)
        rows.append({"grid": g, "rel_l2": rec["rel_l2_diff"], "sup": rec["sup_diff"],
                     "seconds": round(time.perf_counter() - t0, 2)})
        print(json.dumps(rows[-1]), flush=True)
    for a_, b_ in zip(rows[:-1], rows[1:]):
        print(f"{a_['grid']}->{b_['grid']}: error ratio {a_['rel_l2'] / b_['rel_l2']:.2f}")


if __name__ == "__main__":
    main()
