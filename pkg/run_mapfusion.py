#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Direct runner script for the Map-Fusion toolkit.
Runs the command line without installing the package.
"""

import sys
import os

package_dir = os.path.abspath(os.path.dirname(__file__))
sys.path.insert(0, package_dir)

try:
    from mapfusion.main import main
except ImportError as e:
    print(f"Error importing mapfusion package: {e}")
    print("\nInstall the dependencies first:")
    print("  pip install -r requirements.txt")
    sys.exit(1)

if __name__ == "__main__":
    sys.exit(main())
