import numpy as np
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from nomacomac import ChannelSet


def rand_cn(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def channels(*diags):
    """Single-symbol ChannelSet from per-node diagonal entry lists."""
    return ChannelSet(np.array([diags], dtype=complex))


_component = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
complex_vectors = hnp.arrays(
    np.complex128,
    st.integers(1, 12),
    elements=st.builds(complex, _component, _component),
)
