"""Print the arrow diagram, term count and normalization of each preset."""

import warnings

from skewfd import render_diagram
from skewfd.stencil import PRESETS

if __name__ == "__main__":
    for name, make in PRESETS.items():
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            st = make()
        print(f"== {name}: p={st.p} arrows={len(st.arrows)} terms={st.term_count} "
              f"scale={st.scale} h^{st.h_power}")
        print(render_diagram(st))
        print()
