#!/usr/bin/env python3
"""
Simple launcher for penaltylab main.py
Forwards the command line to the penaltylab CLI
"""

import sys
import os

# Make the penaltylab package importable from a checkout
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))


def main():
    try:
        from penaltylab.main import main as run_main
    except ImportError as e:
        print(f"❌ Import error: {e}", file=sys.stderr)
        print("Make sure all required packages are installed:", file=sys.stderr)
        print("pip install -r requirements.txt", file=sys.stderr)
        return 1
    return run_main(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
