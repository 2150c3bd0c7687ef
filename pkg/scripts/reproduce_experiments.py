#!/usr/bin/env python3
"""Run every built-in preset and drop CSV + verification JSON into out/.

The presets cover the headline experiments: plain-vs-optimistic dynamics on
matching pennies, the linear mean-fitting problem at two step sizes, and the
pseudoinverse acceleration comparison.
"""

import sys
from pathlib import Path

from saddle_lab import cli


def main() -> int:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("out")
    for preset in sorted(cli.PRESETS):
        code = cli.main(["run", "--preset", preset, "--out-dir", str(out)])
        if code != cli.EXIT_OK:
            return code
    print(f"all presets written under {out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
