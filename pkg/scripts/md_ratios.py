"""Moderate-deviation normalized errors at N and at a multiple of N on a shared x grid."""

import sys

from _common import parser, write_rows
from spinlab.landscape import classify_point, special_points
from spinlab.model import ModelParams
from spinlab.rates import md_error_ratio


def main():
    ap = parser(__doc__)
    ap.add_argument("--n-list", default="500,2000")
    ap.add_argument("--c-const", type=float, default=0.5)
    args = ap.parse_args()
    cases = [
        ("regular", classify_point(ModelParams(0.5, 0.3, 3)), 4),
        ("special", classify_point(special_points(3)[0].params()), 16),
    ]
    rows = []
    for name, lnd, factor in cases:
        for N in (int(v) for v in args.n_list.split(",")):
            e1, e2, ratio = md_error_ratio(lnd, N, factor, c_const=args.c_const)
            print(f"{name} N={N} vs {factor}N: ratio {ratio:.3f}", file=sys.stderr)
            rows.append((name, N, factor * N, e1, e2, ratio))
    write_rows(args.out, ["regime", "N", "N_large", "error_N", "error_large", "ratio"], rows)


if __name__ == "__main__":
    main()
