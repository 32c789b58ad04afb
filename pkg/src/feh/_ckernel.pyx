# cython: language_level=3, boundscheck=False, wraparound=False
# Compiled build of the evaluation kernel.  The source is shared verbatim
# with the pure-Python build so the two cannot drift apart.
include "_kernel.py"
