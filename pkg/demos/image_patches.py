"""
Similar patches in a grayscale image
====================================

Every 3 x 3 window of an image becomes a 9-dimensional point. We plant the
same odd-looking patch twice and ask which windows resemble the first copy.
Heatmaps are written as PGM files under ``demo-out/``.
"""

import os

import numpy as np

from locspec import find_kernel_similarities, rank_of
from locspec.datasets import eigvec_to_map, extract_patches, patch_index_of, scores_to_heatmap, write_pgm_file

# A smooth ripple with noise, 64 x 64 pixels.
rng = np.random.default_rng(0)
y, x = np.mgrid[0:64, 0:64]
img = np.clip(100 + 60 * np.sin(x / 6.0) * np.cos(y / 9.0) + 0.8 * x + rng.normal(0, 12, (64, 64)), 0, 255)
img = img.round().astype(np.uint8)
ripple = img.copy()

# A bright/dark checker that the ripple never produces, pasted at two places ten pixels apart.
checker = np.array([[250, 10, 250], [10, 250, 10], [250, 10, 250]], dtype=np.uint8)
img[31:34, 31:34] = checker
img[31:34, 41:44] = checker

X, grid = extract_patches(img)
r = patch_index_of(grid, 32, 32)
twin = patch_index_of(grid, 32, 42)
print("patch matrix", X.shape, "reference row", r, "twin row", twin)

res = find_kernel_similarities(X, r, k=3)
print("twin rank:", rank_of(res.ranking, twin))

# Had we picked an ordinary patch of the ripple as the query, an exact copy
# would not be guaranteed to come first: other windows can load more heavily
# on the chosen eigenvectors than the query itself.
plain = ripple.copy()
plain[31:34, 41:44] = plain[31:34, 31:34]
Xp, _ = extract_patches(plain)
res_p = find_kernel_similarities(Xp, r, k=3)
print("copy of an ordinary patch ranks", rank_of(res_p.ranking, twin))

# Dark pixels in the score map are patches similar to the query.
os.makedirs("demo-out", exist_ok=True)
write_pgm_file("demo-out/scores.pgm", scores_to_heatmap(res.scores.s, grid, invert=True))
write_pgm_file("demo-out/eigvec_top.pgm", eigvec_to_map(res.basis, int(res.selection.perm[0]), grid, invert=True))
print("wrote demo-out/scores.pgm and demo-out/eigvec_top.pgm")
