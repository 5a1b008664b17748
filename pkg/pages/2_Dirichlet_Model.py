import numpy as np
import pandas as pd
import plotly.express as px
import plotly.graph_objects as go
import streamlit as st

from woldlab.config import TolerancePolicy
from woldlab.dirichlet import (
    kernel_eval,
    model_space,
    mz_operators,
    reproducing_residual,
    verify_model_equivalence,
)
from woldlab.errors import WoldLabError
from woldlab.measures import parse_measure, psd_check

# Page configuration
st.set_page_config(
    page_title="Dirichlet Model",
    page_icon="🌀",
    layout="wide",
    initial_sidebar_state="expanded"
)

st.title("🌀 Dirichlet-Type Model Spaces")
st.markdown("""
Build the truncated Gram matrix of `D_E(mu1, mu2)`, then recover the measures from the coordinate
shifts and compare the pair with its own model.
Measures are written as `zero`, `lebesgue[:scale]` or `atom:angle[:weight]`.
""")

# Debugging section - will only appear when debug is enabled
debug_mode = st.sidebar.checkbox("Enable Debug Mode", value=False, key="debug_mode")
debug_container = st.container()


def show_debug(message, data=None):
    if debug_mode:
        with debug_container:
            st.write(f"DEBUG: {message}")
            if data is not None:
                st.write(data)


# Sidebar options
st.sidebar.header("Model")
mu1_text = st.sidebar.text_input("mu1", value="lebesgue")
mu2_text = st.sidebar.text_input("mu2", value="atom:0.7:0.5")
cap = st.sidebar.slider("Degree cap", min_value=1, max_value=8, value=4)
coeff_dim = st.sidebar.slider("Coefficient dimension", min_value=1, max_value=3, value=1)


@st.cache_data
def build_model(mu1_text, mu2_text, cap, coeff_dim):
    policy = TolerancePolicy()
    window = max(cap - 1, 0)
    mu1 = parse_measure(mu1_text, window, coeff_dim)
    mu2 = parse_measure(mu2_text, window, coeff_dim)
    space = model_space(mu1, mu2, cap, policy)
    labels = [f"z1^{m} z2^{n}" + (f" e{i}" if coeff_dim > 1 else "") for m, n, i in space.basis]
    report = verify_model_equivalence(*mz_operators(space), policy=policy)
    inputs = {"mu1": mu1, "mu2": mu2}
    recovered = {"mu1": report.recovered_mu1, "mu2": report.recovered_mu2}
    rows = []
    for name in ("mu1", "mu2"):
        for k in range(window + 1):
            rows.append({
                "measure": name,
                "k": k,
                "input": abs(inputs[name].coefficient(k)[0, 0]),
                "recovered": abs(recovered[name].coefficient(k)[0, 0]),
            })
    certificates = {}
    for name, mu in inputs.items():
        if mu.window >= 1:
            certificates[name] = psd_check(mu, policy).lambda_min
    residuals = {
        "gram": report.gram_residual,
        "intertwining": report.intertwining_residual,
        "separation": report.separation_residual,
        "lic": report.lic_residual,
        "toral": report.toral_residual,
    }
    return space.gram, labels, pd.DataFrame(rows), residuals, certificates, report.passed


try:
    gram, labels, coefficients, residuals, certificates, passed = build_model(mu1_text, mu2_text, cap, coeff_dim)
except WoldLabError as exc:
    st.error(f"{type(exc).__name__}: {exc}")
    st.stop()

eigenvalues = np.linalg.eigvalsh(gram)
show_debug("Gram eigenvalues", eigenvalues)
show_debug("Moment matrix minimum eigenvalues", certificates)

col1, col2, col3, col4 = st.columns(4)
col1.metric("Dimension", f"{gram.shape[0]:,}")
col2.metric("Smallest Eigenvalue", f"{eigenvalues[0]:.3f}")
col3.metric("Condition Number", f"{eigenvalues[-1] / eigenvalues[0]:.1f}")
col4.metric("Model Verified", "Yes" if passed else "No")

st.markdown("## 🔢 Gram Matrix")
fig_gram = go.Figure(data=go.Heatmap(z=np.abs(gram), x=labels, y=labels, colorscale="Blues"))
fig_gram.update_layout(title="|G| in graded order", yaxis_autorange="reversed", height=600)
st.plotly_chart(fig_gram, use_container_width=True)

st.markdown("## 🎯 Measure Recovery")
col1, col2 = st.columns(2)
with col1:
    long = coefficients.melt(id_vars=["measure", "k"], var_name="source", value_name="|mu_hat(k)|")
    fig_coeff = px.line(long, x="k", y="|mu_hat(k)|", color="source", facet_col="measure", markers=True,
                        title="Fourier coefficients, entry (0, 0)")
    st.plotly_chart(fig_coeff, use_container_width=True)
with col2:
    table = pd.DataFrame({"residual": pd.Series(residuals)})
    table["gated"] = table.index.isin(["gram", "intertwining"])
    table["below_tolerance"] = table["residual"] < TolerancePolicy().residual_tol
    st.dataframe(table, use_container_width=True)
    st.caption("Only gated residuals decide the verdict; the others are reported.")


@st.cache_data
def kernel_profile(mu1_text, mu2_text, cap, coeff_dim, w):
    """``|K_N(z, w)|`` along the diagonal ``z = (r, r)`` and the reproducing residual at ``w``."""
    window = max(cap - 1, 0)
    space = model_space(parse_measure(mu1_text, window, coeff_dim), parse_measure(mu2_text, window, coeff_dim), cap)
    radii = np.linspace(0.0, 0.95, 40)
    values = [float(np.linalg.norm(kernel_eval(space, (r, r), w), 2)) for r in radii]
    probe = np.random.default_rng(0).normal(size=space.dim)
    return pd.DataFrame({"r": radii, "|K(z, w)|": values}), reproducing_residual(space, probe, w)


st.markdown("## 📍 Reproducing Kernel")
col1, col2 = st.columns(2)
w1 = col1.number_input("w1 (real)", min_value=-0.95, max_value=0.95, value=0.3, step=0.05)
w2 = col2.number_input("w2 (real)", min_value=-0.95, max_value=0.95, value=-0.2, step=0.05)
try:
    profile, reproducing = kernel_profile(mu1_text, mu2_text, cap, coeff_dim, (w1, w2))
except WoldLabError as exc:
    st.error(f"{type(exc).__name__}: {exc}")
    st.stop()
st.metric("Reproducing Residual", f"{reproducing:.2e}")
fig_kernel = px.line(profile, x="r", y="|K(z, w)|", title="Truncated kernel along z = (r, r)")
st.plotly_chart(fig_kernel, use_container_width=True)
