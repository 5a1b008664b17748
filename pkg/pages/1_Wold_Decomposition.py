import numpy as np
import pandas as pd
import plotly.express as px
import streamlit as st

from woldlab.config import TolerancePolicy
from woldlab.errors import WoldLabError
from woldlab.gallery import GALLERY, ExampleSpec, make_example
from woldlab.wold import dual_tuple, wold_single, wold_tuple

# Page configuration
st.set_page_config(
    page_title="Wold Decomposition",
    page_icon="🧩",
    layout="wide",
    initial_sidebar_state="expanded"
)

st.title("🧩 Wold Decomposition")
st.markdown("""
Split the space into the pieces on which each operator is either unitary or a shift.
For a pair, `H00` is the jointly unitary part and `H11` the doubly shift part.
""")

# Debugging section - will only appear when debug is enabled
debug_mode = st.sidebar.checkbox("Enable Debug Mode", value=False, key="debug_mode")
debug_container = st.container()


def show_debug(message, data=None):
    if debug_mode:
        with debug_container:
            st.write(f"DEBUG: {message}")
            if data is not None:
                if isinstance(data, pd.DataFrame):
                    st.write(f"DataFrame shape: {data.shape}")
                    st.dataframe(data.head())
                else:
                    st.write(data)


# Sidebar options
st.sidebar.header("Example")
name = st.sidebar.selectbox("Gallery entry", sorted(GALLERY), index=sorted(GALLERY).index("four-block"))
st.sidebar.caption(GALLERY[name].description)
params = {}
for key, default in GALLERY[name].defaults.items():
    if isinstance(default, int):
        params[key] = st.sidebar.number_input(key, value=default, min_value=0, step=1)
    elif isinstance(default, float):
        params[key] = st.sidebar.number_input(key, value=default, format="%.4f")
    else:
        params[key] = st.sidebar.text_input(key, value=default)
use_dual = st.sidebar.checkbox("Decompose the Cauchy duals", value=False)
force = st.sidebar.checkbox("Force when prerequisites fail", value=False)
residual_tol = st.sidebar.select_slider("Residual tolerance", options=[1e-10, 1e-8, 1e-6, 1e-4], value=1e-8)


@st.cache_data
def decompose(name, params, use_dual, force, residual_tol):
    """Tables of single and tuple decomposition results."""
    policy = TolerancePolicy(residual_tol=residual_tol)
    example = make_example(ExampleSpec(name=name, params=params))
    ops = dual_tuple(example.operators, policy) if use_dual else example.operators
    singles = []
    for i, T in enumerate(ops, start=1):
        report = wold_single(T, policy)
        singles.append({
            "operator": f"T{i}",
            "h_inf": report.dims[0],
            "wandering": report.dims[1],
            **report.residuals,
            "iterations": report.iterations_to_stabilize,
            "truncation_limited": report.truncation_limited,
            "passed": report.passed,
        })
    pieces = None
    if len(ops) > 1:
        report = wold_tuple(ops, policy, force=force)
        rows = []
        for piece in report.pieces.values():
            rows.append({
                "piece": f"H{piece.label}",
                "dim": piece.dim,
                "worst_unitary": max(
                    (u for bit, u in zip(piece.alpha, piece.unitary_residuals) if bit == 0), default=0.0
                ),
                "worst_reducing": max(piece.reducing_residuals),
                "passed": piece.passed(report.residual_tol),
            })
        pieces = {
            "table": pd.DataFrame(rows),
            "completeness": report.completeness_residual,
            "orthogonality": report.orthogonality_residual,
            "passed": report.passed,
        }
    return example.expectation, pd.DataFrame(singles), pieces


try:
    expectation, singles, pieces = decompose(name, params, use_dual, force, residual_tol)
except WoldLabError as exc:
    st.error(f"{type(exc).__name__}: {exc}")
    st.stop()

show_debug("Expectation record", expectation)

st.markdown("## 📏 Single-Operator Decompositions")
col1, col2, col3 = st.columns(3)
col1.metric("Dimension", f"{expectation.get('dim', 0):,}")
col2.metric("Operators", f"{len(singles):,}")
col3.metric("All Passed", "Yes" if singles["passed"].all() else "No")
st.dataframe(singles, use_container_width=True, hide_index=True)

melted = singles.melt(id_vars="operator", value_vars=["h_inf", "wandering"], var_name="part", value_name="dim")
fig_single = px.bar(melted, x="operator", y="dim", color="part", barmode="stack", title="H_inf and wandering span")
st.plotly_chart(fig_single, use_container_width=True)

if pieces is not None:
    st.markdown("## 🧱 Tuple Pieces")
    col1, col2, col3 = st.columns(3)
    col1.metric("Completeness Residual", f"{pieces['completeness']:.2e}")
    col2.metric("Orthogonality Residual", f"{pieces['orthogonality']:.2e}")
    col3.metric("Decomposition Passed", "Yes" if pieces["passed"] else "No")

    table = pieces["table"]
    expected = expectation.get("pieces")
    if expected is not None:
        table["expected_dim"] = [expected.get(p[1:], np.nan) for p in table["piece"]]
    show_debug("Piece table", table)
    st.dataframe(table, use_container_width=True, hide_index=True)

    fig_pieces = px.bar(table, x="piece", y="dim", color="passed", title="Piece dimensions",
                        color_discrete_map={True: "#00C851", False: "#FF4B4B"})
    st.plotly_chart(fig_pieces, use_container_width=True)
