"""Reference SSIM for the fixed image pair used by the SSIM golden test.

Brute-force loop over every 8x8 window (stride 1), population variances,
C1 = 0.01^2, C2 = 0.03^2, mean over windows and channels.
The second line is scikit-image's SSIM at window 7 (it only accepts odd
windows), used to pin the window parameter as well.
Run: python3 golden_ssim.py
"""
import math

import numpy as np

C, H, W, K = 3, 12, 10, 8
C1, C2 = 0.01**2, 0.03**2


def pair():
    a = np.empty((C, H, W))
    b = np.empty((C, H, W))
    for c in range(C):
        for y in range(H):
            for x in range(W):
                a[c, y, x] = 0.5 + 0.4 * math.sin(0.3 * x + 0.2 * y + c)
                b[c, y, x] = 0.5 + 0.3 * math.cos(0.17 * x * y + 0.5 * c) + 0.05 * math.sin(1.7 * x)
    return a, b


def ssim(a, b, K=K):
    scores = []
    for c in range(C):
        for y in range(H - K + 1):
            for x in range(W - K + 1):
                pa = a[c, y:y + K, x:x + K]
                pb = b[c, y:y + K, x:x + K]
                mu_a, mu_b = pa.mean(), pb.mean()
                var_a = ((pa - mu_a) ** 2).mean()
                var_b = ((pb - mu_b) ** 2).mean()
                cov = ((pa - mu_a) * (pb - mu_b)).mean()
                scores.append((2 * mu_a * mu_b + C1) * (2 * cov + C2)
                              / ((mu_a**2 + mu_b**2 + C1) * (var_a + var_b + C2)))
    return float(np.mean(scores))


if __name__ == "__main__":
    from skimage.metrics import structural_similarity

    a, b = pair()
    print(f"{ssim(a, b):.17g}")
    print(f"{structural_similarity(a, b, win_size=7, data_range=1.0, channel_axis=0, use_sample_covariance=False, gaussian_weights=False):.17g}")
