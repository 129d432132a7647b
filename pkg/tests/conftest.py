import os
import sys

# make the frozen oracle module importable regardless of invocation dir
sys.path.insert(0, os.path.dirname(__file__))
