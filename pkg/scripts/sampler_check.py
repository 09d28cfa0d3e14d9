"""Glauber chains at small N against the enumerated magnetization law."""

import sys

from _common import parser, write_rows
from spinlab.exact import brute_force_pmf
from spinlab.model import ModelParams
from spinlab.sampler import empirical_law, run_chains, total_variation


def main():
    ap = parser(__doc__)
    ap.add_argument("--beta", type=float, default=0.5)
    ap.add_argument("--h", type=float, default=0.3)
    ap.add_argument("--p", type=int, default=3)
    ap.add_argument("--N", type=int, default=10)
    ap.add_argument("--n-chains", type=int, default=1000)
    ap.add_argument("--n-samples", type=int, default=1000)
    ap.add_argument("--burn-in", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    prm = ModelParams(args.beta, args.h, args.p, args.N)
    S = run_chains(prm, args.seed, args.n_chains, args.n_samples, args.burn_in)
    emp, exact = empirical_law(S, args.N), brute_force_pmf(prm).probs
    print(f"total variation {total_variation(emp, exact):.3e} from {S.size} samples", file=sys.stderr)
    write_rows(args.out, ["k", "empirical", "exact"], [(k, float(emp[k]), float(exact[k])) for k in range(args.N + 1)])


if __name__ == "__main__":
    main()
