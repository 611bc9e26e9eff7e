"""Kernel deviation along an exhaustion for both collar and scaling maps."""
import argparse

from canondbar.geometry import make_domain
from canondbar.kernels import stability_probe


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--domain", default="disc")
    ap.add_argument("--levels", default="4,8,16,32,64")
    ap.add_argument("--kappa", type=float, default=0.5)
    a = ap.parse_args()
    dom = make_domain(a.domain)
    levels = [int(x) for x in a.levels.split(",")]
    for mode in ("collar", "scaling"):
        print(f"# {mode}")
        for r in stability_probe(dom, levels, a.kappa, mode=mode):
            print(f"level {r['level']:4d}  deviation {r['deviation']:.3e}  gradient {r['grad_deviation']:.3e}")


if __name__ == "__main__":
    main()
