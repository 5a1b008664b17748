import numpy as np

from woldlab.operators import DenseOperator, InnerProductSpace


def random_gram(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return a @ a.conj().T + dim * np.eye(dim)


def random_operator(rng, dim, gram=None):
    space = InnerProductSpace(gram if gram is not None else np.eye(dim))
    matrix = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return DenseOperator.on(matrix, space)
