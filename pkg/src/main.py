"""Entry point: python -m src.main <command> [options]"""
import logging
import sys
from pathlib import Path
from typing import List, Optional

# Add src directory to path
sys.path.append(str(Path(__file__).parent.parent))

from src.cli import main as cli_main

INTERRUPTED = 130


def run(argv: Optional[List[str]] = None) -> int:
    try:
        return cli_main(argv)
    except KeyboardInterrupt:
        logging.warning("Interrupted; completed tables stay in the cache, partial files end in .part")
        return INTERRUPTED


if __name__ == "__main__":
    sys.exit(run())
