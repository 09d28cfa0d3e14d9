"""Laplace expansion of the special-point partial sums against the exact sums."""

import sys

from _common import parser, write_rows
from spinlab.landscape import special_points
from spinlab.laplace import LaplaceContext, bn_scaled_error, fit_bnx_constant, laplace_BNx, partial_sums


def main():
    ap = parser(__doc__)
    ap.add_argument("--n-list", default="1000,4000,16000")
    ap.add_argument("--x-grid", default="0,0.5,1,2")
    ap.add_argument("--variant", choices=["t5", "t4"], default="t5")
    args = ap.parse_args()
    ctx = LaplaceContext.from_special(special_points(3)[0])
    Ns = [int(v) for v in args.n_list.split(",")]
    xs = [float(v) for v in args.x_grid.split(",")]
    rows = []
    for N in Ns:
        print(f"N={N}: |laplace_BN/B_N - 1| sqrt(N) = {bn_scaled_error(ctx, N):.4f}", file=sys.stderr)
        for x in xs:
            ps, ap_ = partial_sums(ctx, N, x), laplace_BNx(ctx, N, x, args.variant)
            rows.append((N, x, ps.B_N_x, ap_.estimate, ap_.one_term, ap_.bound))
    print(f"fitted K = {fit_bnx_constant(ctx, Ns[:2], xs):.4f}", file=sys.stderr)
    write_rows(args.out, ["N", "x", "B_Nx", "two_term", "one_term", "bound"], rows)


if __name__ == "__main__":
    main()
