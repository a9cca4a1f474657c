"""
Recording a tape and checking it against finite differences
============================================================

Operations only record when a ``Tape`` is active.  ``backward`` walks the
tape in reverse and leaves gradients on the leaf tensors.
"""

import numpy as np

from priming_bench import autodiff as ad
from priming_bench.autodiff import Tape, Tensor, backward
from priming_bench.gradcheck import max_relative_error

rng = np.random.default_rng(0)

# a two-layer toy: loss = sum(tanh(x W1) W2)
x = Tensor(rng.normal(size=(4, 3)))
W1 = Tensor(rng.normal(size=(3, 5)), requires_grad=True)
W2 = Tensor(rng.normal(size=(5, 1)), requires_grad=True)


def loss():
    return ad.sum_all(ad.matmul(ad.tanh(ad.matmul(x, W1)), W2))


with Tape() as tape:
    out = loss()
    backward(out)
print(f"loss {out.item():.6f} recorded {len(tape)} nodes")
print("dL/dW2 =", W2.grad.ravel().round(4))

# central differences agree to about 1e-10 here
print(f"relative error vs finite differences: {max_relative_error(loss, [W1, W2]):.2e}")

# padded positions get exactly zero attention and exactly zero gradient
scores = Tensor(rng.normal(size=(2, 4)), requires_grad=True)
mask = np.array([[True, True, False, False], [True, True, True, False]])
with Tape():
    weights = ad.softmax(scores, axis=-1, mask=mask)
    backward(ad.sum_all(ad.mul(weights, Tensor(rng.normal(size=(2, 4))))))
print("weights:\n", weights.data.round(4))
print("grad at masked slots:", scores.grad[~mask])
