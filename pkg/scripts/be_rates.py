"""Exact Kolmogorov distances and fitted slopes at a regular, a critical and a special point (p = 3)."""

import sys

from _common import parser, write_rows
from spinlab.landscape import classify_point, critical_curve, special_points
from spinlab.model import ModelParams
from spinlab.rates import be_rates


def main():
    ap = parser(__doc__)
    ap.add_argument("--n-list", default="250,500,1000,2000,4000")
    ap.add_argument("--special-n-list", default="1000,4000,16000,64000")
    args = ap.parse_args()
    Ns = [int(v) for v in args.n_list.split(",")]
    cp = critical_curve(3, [0.6])[0]
    cases = [
        ("regular", classify_point(ModelParams(0.5, 0.3, 3)), Ns, [0]),
        ("critical", classify_point(ModelParams(0.6, cp.h, 3)), Ns, [0, 1]),
        ("special", classify_point(special_points(3)[0].params()), [int(v) for v in args.special_n_list.split(",")], [0]),
    ]
    rows = []
    for name, lnd, ns, ks in cases:
        for k in ks:
            rep = be_rates(lnd, ns, k)
            print(f"{name} k={k}: slope {rep.slope:.3f}, residual {rep.residual:.4f}", file=sys.stderr)
            rows += [(name, k, n, d, rep.slope) for n, d in rep.rows()]
    write_rows(args.out, ["regime", "k", "N", "kolmogorov_distance", "slope"], rows)


if __name__ == "__main__":
    main()
