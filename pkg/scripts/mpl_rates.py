"""Berry-Esseen distance of the MPL estimator, exact pushforward and Monte Carlo."""

import sys

from _common import parser, write_rows
from spinlab.model import ModelParams
from spinlab.mpl import mpl_be_experiment


def main():
    ap = parser(__doc__)
    ap.add_argument("--beta", type=float, default=0.75)
    ap.add_argument("--p", type=int, default=3)
    ap.add_argument("--n-list", default="250,500,1000,2000,4000")
    ap.add_argument("--n-rep", type=int, default=10000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rep = mpl_be_experiment(ModelParams(args.beta, 0.0, args.p), [int(v) for v in args.n_list.split(",")],
                            args.n_rep, args.seed)
    print(f"m* {rep.extra['m_star']:.6f}, variance {rep.extra['variance']:.6f}, "
          f"slope vs N/log N {rep.slope:.3f}", file=sys.stderr)
    mc = rep.extra["mc_distance"]
    write_rows(args.out, ["N", "exact_distance", "mc_distance"], [(n, d, mc[i]) for i, (n, d) in enumerate(rep.rows())])


if __name__ == "__main__":
    main()
