import hypothesis
import hypothesis.strategies as st

from clinch.core import validate_instance

hypothesis.settings.register_profile("suite", max_examples=40, deadline=None)
hypothesis.settings.load_profile("suite")


def money(lo=0.01, hi=10.0):
    return st.floats(min_value=lo, max_value=hi, allow_nan=False,
                     allow_infinity=False)


@st.composite
def instances(draw, n_min=2, n_max=5, v_max=10.0, b_min=0.05, b_max=3.0,
              s_max=3.0):
    """Random validated instances with strictly positive entries."""
    n = draw(st.integers(n_min, n_max))
    values = draw(st.lists(money(0.05, v_max), min_size=n, max_size=n))
    budgets = draw(st.lists(money(b_min, b_max), min_size=n, max_size=n))
    supply = draw(money(0.01, s_max))
    return validate_instance(values=values, budgets=budgets, supply=supply)


def outcome_close(a, b, tol):
    """Componentwise closeness of two outcomes, tolerance scaled by max(1, .)."""
    pairs = zip(a.allocation + a.payments, b.allocation + b.payments)
    return all(abs(u - v) <= tol * max(1.0, abs(u), abs(v)) for u, v in pairs)
