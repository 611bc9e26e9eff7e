"""Sup-norm ratio of the derivative-free operator over the bidisc family per resolution."""
import argparse

from canondbar.forms import bidisc_family
from canondbar.product import ProductDomain, TildeConfig, uniform_bound_probe
from canondbar.geometry import unit_disc


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--factors", default="1,1.5,2,2.5")
    ap.add_argument("--family", type=int, default=10)
    a = ap.parse_args()
    base = TildeConfig(24, 8, 8, 16, 32, 12, 6, 6)
    cfgs = [base.refined(float(x)) for x in a.factors.split(",")]
    rep = uniform_bound_probe(ProductDomain((unit_disc(), unit_disc())), bidisc_family(a.family), cfgs)
    for x, s in zip(a.factors.split(","), rep.components["per_resolution"]):
        print(f"refinement {x:>4}: sup ratio {s:.4f}")
    print("worst form:", rep.argmax)


if __name__ == "__main__":
    main()
