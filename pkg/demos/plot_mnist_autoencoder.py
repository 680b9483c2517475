"""
Reconstructing digits from 7x7 DCT coefficients
===============================================

The lowest 49 DCT coefficients of a 28x28 digit are inverted three ways:
pseudo-inverse, exponential prior (positive pixels) and TED prior (pixels
in [0, 1]).  Pass an output directory to also write PGM panels.
"""

import os
import sys

import numpy as np

from maxent_inversion.experiments import autoencode_batch
from maxent_inversion.fileio import read_idx_images, write_pgm

here = os.path.dirname(os.path.abspath(__file__))
archive = os.path.join(here, "..", "tests", "data", "mnist-digits-idx3-ubyte")
batch = read_idx_images(archive, 6)
runs = autoencode_batch(batch.pixels, batch.side, keep=7)

print("digit  pinv<0|>1  exp>1   exp max  ted mse  pinv mse")
for i, run in enumerate(runs):
    m = run.metrics
    print(
        f"{i:5d}  {m['pinv']['out_of_range']:9d}  {m['exp']['above_one']:5d}  "
        f"{m['exp']['max']:8.3f}  {m['ted']['mse']:7.4f}  {m['pinv']['mse']:8.4f}"
    )

if len(sys.argv) > 1:
    out = sys.argv[1]
    os.makedirs(out, exist_ok=True)
    for i, run in enumerate(runs):
        for tag, img in [("original", run.original), ("pinv", run.pinv.x_bar),
                         ("exp", run.exponential.x_bar), ("ted", run.ted.x_bar)]:
            write_pgm(os.path.join(out, f"{i}_{tag}.pgm"), np.asarray(img), batch.side)
    print("wrote panels to", out)
