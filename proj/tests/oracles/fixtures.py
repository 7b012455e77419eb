"""Straight-line reference values frozen into the C++ unit tests.

Run with python3; prints each fixture at 17 significant digits.
"""
import itertools
import math

import numpy as np


def brute_w(x, y, theta, p):
    px = [float(np.dot(theta, r)) for r in x]
    py = [float(np.dot(theta, r)) for r in y]
    n = len(px)
    return min(sum(abs(px[k] - py[pi[k]]) ** p for k in range(n)) / n
               for pi in itertools.permutations(range(n)))


def relu(z):
    return np.maximum(z, 0.0)


def show(name, value):
    print(f"{name} = {value!r}")


# two-layer relu network with hand-set weights (dense row-major layout)
u = np.array([1.0, -2.0, 0.5, 1.0, 0.2, -0.3, 2.0, 1.0, 0.2])
x = np.array([0.7, 0.4])
W1, b1, W2, b2 = u[0:4].reshape(2, 2), u[4:6], u[6:8].reshape(1, 2), u[8:9]
h1 = relu(W1 @ x + b1)
show("relu_forward", float(relu(W2 @ h1 + b2)[0]))

# sample loss of the affine 1-D model T(u,x) = u0 x + u1 on a 2-point batch
u = np.array([0.5, 0.25])
X = np.array([[1.0], [-2.0]])
Y = np.array([[0.3], [1.0]])
T = u[0] * X + u[1]
show("toy_sample_loss", brute_w(T, Y, np.array([1.0]), 2.0))

# w_theta on the two-point instance, p = 2 and p = 1
X = np.array([[0.0], [2.0]])
Y = np.array([[1.0], [3.0]])
show("w_two_point_p2", brute_w(X, Y, np.array([1.0]), 2.0))
show("w_two_point_p1", brute_w(X, Y, np.array([1.0]), 1.0))

# projection of (1,1) on the diagonal
show("project_diag", float(np.dot([1.0, 1.0], [1 / math.sqrt(2), 1 / math.sqrt(2)])))

# alpha_zero substitutions
show("alpha_zero_a", 1.0 / ((2 ** 2 + 2 * 1.0) * 3 * 1.0))
show("alpha_zero_b", 1.0 / ((1 ** 2 + 2 * 0.5) * 1 * 1.0))

# gradient flow of F(u) = (u - 3)^2 from u0 = 5 at time 1
show("flow_closed_form", 3.0 + 2.0 * math.exp(-2.0))

# d_c geometric series for k_max = 8
show("dc_unit", sum(2.0 ** -k for k in range(1, 9)))
show("dc_half", 0.5 * sum(2.0 ** -k for k in range(1, 9)))
