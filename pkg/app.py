# app.py - Command-line entry point for espace scenarios
import argparse
import logging
import os
import sys
from dataclasses import replace
from typing import List, Optional

from dotenv import load_dotenv

from fields.errors import EspaceError
from scenarios import load_config, run_scenario
from scenarios.config import COMMANDS, check_seed

# Load environment variables
load_dotenv()


# Configuration
class Config:
    THREADS = max(int(os.getenv('ESPACE_THREADS', '1')), 1)
    LOG_LEVEL = os.getenv('ESPACE_LOG_LEVEL', 'INFO').upper()
    OUTPUT_DIR = os.getenv('ESPACE_OUTPUT_DIR', 'output')


# Configure logging
logging.basicConfig(level=getattr(logging, Config.LOG_LEVEL, logging.INFO),
                    format='%(asctime)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_IO = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='espace',
        description='Transaction fields on economic space: steady states, surface-like waves, '
                    'field simulation and micro-to-macro aggregation.',
    )
    parser.add_argument('command', choices=COMMANDS)
    parser.add_argument('--config', required=True, help='JSON scenario document')
    parser.add_argument('--out', default=None, help='output directory (default: config output_dir, then ESPACE_OUTPUT_DIR)')
    parser.add_argument('--seed', type=int, default=None, help='override rng_seed from the config')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config, args.command)
        if args.seed is not None:
            config = replace(config, rng_seed=check_seed(args.seed, '--seed'))
        out_dir = args.out or config.output_dir or Config.OUTPUT_DIR
        manifest = run_scenario(config, out_dir=out_dir, threads=Config.THREADS)
    except EspaceError as e:
        logger.error(f"❌ {args.command} failed ({type(e).__name__}): {e}")
        return e.exit_code
    except OSError as e:
        logger.error(f"❌ {args.command} failed on I/O: {e}")
        return EXIT_IO

    logger.info(f"✅ {args.command} wrote {len(manifest.artifacts)} artifacts to {out_dir} "
                f"in {manifest.wall_time:.2f}s")
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
