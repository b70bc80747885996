"""Command line interface.

    chevnet verify <scenario.json> [--report out.json] [--seed N]
                   [--budget N] [--jobs N]
    chevnet tables <system>
    chevnet net-close <scenario.json>

Exit codes: 0 all non-skipped checks pass, 1 any check fails,
2 configuration error.
"""

from __future__ import annotations

import argparse
import sys

from .chevalg import compute_structure_constants
from .ringkit import RingConfigError
from .rootsys import RootSystemError, from_name
from .verify import Scenario, ScenarioError, load_config, run_scenarios


def structure_constant_lines(system: str) -> list[str]:
    """Golden-table dump: one line per (alpha, beta, N) in root coordinates."""
    rs = from_name(system)
    sc = compute_structure_constants(rs)
    lines = []
    for (i, j), n in sorted(sc.N.items(), key=lambda kv: (rs.roots[kv[0][0]],
                                                          rs.roots[kv[0][1]])):
        a = ",".join(str(c) for c in rs.roots[i])
        b = ",".join(str(c) for c in rs.roots[j])
        lines.append(f"({a}) ({b}) {n}")
    return lines


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="chevnet",
                                     description="net subgroups of adjoint Chevalley "
                                                 "groups over finite rings, verified")
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", help="run scenario checks")
    p_verify.add_argument("scenario", help="scenario JSON (single or suite)")
    p_verify.add_argument("--report", help="write the JSON report here")
    p_verify.add_argument("--seed", type=int, default=None)
    p_verify.add_argument("--budget", type=int, default=None)
    p_verify.add_argument("--jobs", type=int, default=1)

    p_tables = sub.add_parser("tables", help="dump structure constants")
    p_tables.add_argument("system", help="root system name, e.g. A2")

    p_close = sub.add_parser("net-close", help="print the closed net of a scenario")
    p_close.add_argument("scenario")

    args = parser.parse_args(argv)
    try:
        if args.command == "tables":
            for line in structure_constant_lines(args.system):
                print(line)
            return 0
        if args.command == "net-close":
            raws = load_config(args.scenario)
            for raw in raws:
                scn = Scenario(raw)
                print(f"# {scn.name}")
                for root, ideal in scn.net.describe().items():
                    print(f"{root}: {ideal}")
            return 0
        if args.command == "verify":
            _, code = run_scenarios(args.scenario, report_path=args.report,
                                    seed=args.seed, budget=args.budget,
                                    jobs=args.jobs)
            return code
    except (ScenarioError, RootSystemError, RingConfigError) as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
