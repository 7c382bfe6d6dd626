"""A tour of the tensor engine: forward ops, backward, grad checks, Adam.

Run with:  python3 demos/01_tensors_and_gradients.py
"""

import numpy as np

from gadkit import Adam, Tensor, backward, grad_check
from gadkit import autodiff as ad

rng = np.random.default_rng(0)

# Tensors are float64 matrices. Gradients accumulate into leaves that ask
# for them.
w = Tensor(rng.normal(size=(3, 2)), requires_grad=True)
x = Tensor(rng.normal(size=(4, 3)))

loss = ad.mean_all(ad.sigmoid(ad.matmul(x, w)))
backward(loss)
print("loss:", loss.item())
print("dloss/dw:\n", w.grad)

# Every gradient in the package is validated against central differences.
err = grad_check(lambda t: ad.mean_all(ad.sigmoid(ad.matmul(x, t))), w)
print("grad_check max relative error:", err)

# The optimizer is Adam with bias correction. Walk a quadratic bowl:
target = np.array([[2.0, -1.0]])
p = Tensor(np.zeros((1, 2)), requires_grad=True)
opt = Adam([p], lr=0.05)
for step in range(300):
    p.zero_grad()
    diff = ad.sub(p, Tensor(target))
    backward(ad.sum_all(ad.mul(diff, diff)))
    opt.step()
print("after 300 steps p =", p.data, "(target", target, ")")
