from hypothesis import settings

# numerical kernels (numba compilation, quadrature) have no meaningful per-example deadline
settings.register_profile("numeric", deadline=None)
settings.load_profile("numeric")
