"""Mean and spread of the exact KL divergence of the block sampler as N grows.

Prints one JSON summary per N plus the ratio of consecutive means to the
ratio predicted by linear growth in floor(N / M).
"""

import argparse
import json

from brwgibbs import IncrementModel, kl_statistics


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--beta", type=float, default=0.8)
    parser.add_argument("--M", type=int, default=4)
    parser.add_argument("--N", type=int, nargs="+", default=[12, 16, 20])
    parser.add_argument("--seeds", type=int, default=300)
    parser.add_argument("--d", type=int, default=2)
    args = parser.parse_args(argv)

    model = IncrementModel.gaussian(args.d)
    summaries = []
    for N in args.N:
        s = kl_statistics(model, args.beta, N, args.M, range(args.seeds))
        summaries.append(s)
        print(json.dumps(s.as_json()))
    for a, b in zip(summaries, summaries[1:]):
        observed = b.mean / a.mean
        predicted = (b.N // args.M) / (a.N // args.M)
        print(f"N={a.N}->{b.N}: mean ratio {observed:.4f}, linear prediction {predicted:.4f}, "
              f"std ratio {b.std / a.std:.4f}")


if __name__ == "__main__":
    main()
