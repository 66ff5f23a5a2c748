"""Blocking probability as the graph deepens.

The blocking probability obeys a quadratic-map recurrence and climbs to a
limit: certain blocking up to the critical vacancy 1/sqrt(2), and
(1 - q^2)^2 / q^4 above it.
"""

import math

from chansearch import blocking_limit, blocking_probability

QS = [0.5, 0.65, 1 / math.sqrt(2), 0.75, 0.8, 0.9]


def main() -> None:
    print("Blocking probability of the depth-k fully parallel graph")
    print("=" * 68)
    header = "  k " + "".join(f"{f'q={q:.4g}':>11}" for q in QS)
    print(header)
    for k in (0, 1, 2, 4, 8, 16, 32, 64):
        row = f"{k:>4}" + "".join(f"{blocking_probability(k, q):>11.6f}" for q in QS)
        print(row)
    print("-" * len(header))
    print("lim " + "".join(f"{blocking_limit(q):>11.6f}" for q in QS))

    print("\nThe critical point: below 1/sqrt(2) every deep enough graph")
    print("blocks almost surely; above it a linking probability survives.")
    for q in (0.70, 0.7071, 0.71, 0.75, 0.9, 0.99):
        print(f"  q={q:<7} limit blocking = {blocking_limit(q):.6f}")


if __name__ == "__main__":
    main()
