"""Mean collision probability sum_u mu_{beta,M}(u)^2 against the block depth M."""

import argparse

import numpy as np

from brwgibbs import BrwInstance, IncrementModel, gibbs_distribution, prf


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--beta", type=float, default=0.8)
    parser.add_argument("--M", type=int, nargs="+", default=list(range(2, 11)))
    parser.add_argument("--seeds", type=int, default=500)
    args = parser.parse_args(argv)

    model = IncrementModel.gaussian(2)
    print("M,mean_collision,stderr")
    for M in args.M:
        c = np.array([
            np.sum(gibbs_distribution(BrwInstance(model, M, prf.derive_seed(8, M, s)), (), args.beta, M).probs ** 2)
            for s in range(args.seeds)
        ])
        print(f"{M},{c.mean():.6f},{c.std(ddof=1) / np.sqrt(c.size):.6f}")


if __name__ == "__main__":
    main()
