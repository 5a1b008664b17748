import os

import pandas as pd
import plotly.express as px
import streamlit as st

# Page configuration - must be the first Streamlit command
st.set_page_config(
    page_title="Wold Decomposition Lab",
    page_icon="🧮",
    layout="wide",
    initial_sidebar_state="expanded"
)


@st.cache_data
def load_index():
    """Gallery index written by data_generator.py"""
    path = os.path.join("data", "gallery", "index.csv")
    try:
        return pd.read_csv(path)
    except FileNotFoundError:
        st.error("Gallery files not found. Please run data_generator.py first.")
        return None


st.title("🧮 Wold Decomposition Lab")
st.markdown("""
### Decompose left-inverse commuting tuples
This explorer runs the `woldlab` engine on the registered examples and on your own measures.

- **Wold Decomposition**: hyper-ranges, wandering spans and the `2^n` pieces of a commuting tuple.
- **Dirichlet Model**: model Gram matrices for `D_E(mu1, mu2)`, measure recovery and model verification.
- **Identity Checks**: left-inverse commutation, 2-isometry and toral residuals across the gallery.

Every number shown here is also available from the `woldlab` command line as a JSON report.
Use the sidebar to navigate between the views.
""")

index = load_index()
if index is None:
    st.stop()

col1, col2, col3 = st.columns(3)
col1.metric("Gallery Examples", f"{len(index):,}")
col2.metric("Negative Controls", f"{int(index['negative_control'].sum()):,}")
col3.metric("Largest Dimension", f"{int(index['dim'].max()):,}")

st.markdown("### Gallery")
st.dataframe(index, use_container_width=True, hide_index=True)

fig = px.bar(
    index.sort_values("dim"),
    x="name",
    y="dim",
    color="negative_control",
    title="Example Dimensions",
    color_discrete_map={True: "#FF4B4B", False: "#29B5E8"},
)
st.plotly_chart(fig, use_container_width=True)
