"""Reference logits for the fixed network used by the forward golden test.

Weights and input are closed-form (no RNG), so the C++ test can rebuild the
same network. Run: python3 golden_forward.py
"""
import math

import torch
import torch.nn.functional as F

torch.set_default_dtype(torch.float64)


def wave(count, phase, amp=0.5, freq=0.7):
    return torch.tensor([amp * math.sin(freq * k + phase) for k in range(count)])


def bias(count, phase):
    return torch.tensor([0.1 * math.cos(0.5 * k + phase) for k in range(count)])


x = torch.tensor([0.5 + 0.5 * math.cos(0.11 * i) for i in range(2 * 7 * 7)]).reshape(1, 2, 7, 7)

k1 = wave(3 * 2 * 3 * 3, 0.0).reshape(3, 2, 3, 3)
b1 = bias(3, 0.0)
w2 = wave(12 * 5, 1.3).reshape(12, 5)  # stored in_features x out_features
b2 = bias(5, 1.0)
w3 = wave(5 * 4, 2.6).reshape(5, 4)

z = F.conv2d(x, k1, b1, stride=2, padding=1)
z = F.relu(z)
z = F.avg_pool2d(z, kernel_size=2, stride=2)
z = z.flatten()
z = F.relu(z @ w2 + b2)
logits = z @ w3

for v in logits.tolist():
    print(f"{v:.17g}")
