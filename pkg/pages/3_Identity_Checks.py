import numpy as np
import pandas as pd
import plotly.express as px
import streamlit as st

from woldlab.config import TolerancePolicy
from woldlab.errors import WoldLabError
from woldlab.gallery import GALLERY, make_example
from woldlab.operators import check_left_inverse_commuting, check_toral_two_isometry, check_two_isometry

# Page configuration
st.set_page_config(
    page_title="Identity Checks",
    page_icon="✅",
    layout="wide",
    initial_sidebar_state="expanded"
)

st.title("✅ Identity Checks")
st.markdown("""
Residuals of the operator identities on every gallery entry, evaluated on the basis vectors
with enough headroom for the identity to be honest. Negative controls are expected to fail.
""")

residual_tol = st.sidebar.select_slider("Residual tolerance", options=[1e-12, 1e-10, 1e-8, 1e-6], value=1e-8)
show_controls = st.sidebar.checkbox("Include negative controls", value=True)


@st.cache_data
def gallery_residuals(residual_tol):
    """One row per example and identity."""
    policy = TolerancePolicy(residual_tol=residual_tol)
    rows = []
    for name in sorted(GALLERY):
        try:
            example = make_example(name)
        except WoldLabError as exc:
            rows.append({"example": name, "identity": "build", "residual": np.nan, "error": str(exc)})
            continue
        ops = example.operators
        control = example.expectation.get("negative_control", False)
        for i, T in enumerate(ops, start=1):
            rows.append({"example": name, "identity": f"two_isometry[{i}]",
                         "residual": check_two_isometry(T, policy), "negative_control": control})
        if len(ops) > 1:
            lic = check_left_inverse_commuting(ops, policy)
            rows.append({"example": name, "identity": "lic", "residual": lic.lic_residual,
                         "negative_control": control})
            rows.append({"example": name, "identity": "commutator", "residual": lic.commutator_residual,
                         "negative_control": control})
        if len(ops) == 2:
            toral = check_toral_two_isometry(*ops, policy)
            rows.append({"example": name, "identity": "toral", "residual": toral.residual,
                         "negative_control": control})
    frame = pd.DataFrame(rows)
    frame["passed"] = frame["residual"] < residual_tol
    return frame


results = gallery_residuals(residual_tol)
if not show_controls:
    results = results[~results["negative_control"].fillna(False).astype(bool)]

col1, col2, col3 = st.columns(3)
col1.metric("Checks Run", f"{len(results):,}")
col2.metric("Passed", f"{int(results['passed'].sum()):,}")
col3.metric("Failed", f"{int((~results['passed']).sum()):,}")

st.markdown("## 📋 Residual Table")
pivot = results.pivot_table(index="example", columns="identity", values="residual", aggfunc="max")
st.dataframe(pivot.style.format("{:.2e}", na_rep="-"), use_container_width=True)

st.markdown("## 📊 Residuals by Identity")
plotted = results.assign(residual=results["residual"].clip(lower=1e-18))
fig = px.strip(plotted, x="identity", y="residual", color="passed", hover_data=["example"], log_y=True,
               color_discrete_map={True: "#00C851", False: "#FF4B4B"}, title="Residuals (log scale)")
fig.add_hline(y=residual_tol, line_dash="dash", annotation_text="tolerance")
st.plotly_chart(fig, use_container_width=True)
