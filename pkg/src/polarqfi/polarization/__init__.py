"""Constellations, Husimi-function analytics, multipoles and polarization degrees."""

from polarqfi.polarization.dop import semiclassical_dop, stokes_vector
from polarqfi.polarization.majorana import (
    MajoranaConstellation,
    bloch_coherent_state,
    bloch_coherent_vector,
    constellation_to_state,
    constellation_vector,
    load_constellation,
    majorana_roots,
    normalization_factor,
    save_constellation,
)
from polarqfi.polarization.multipoles import (
    StateMultipoles,
    anticoherence_order,
    clebsch_gordan,
    cumulative_multipole,
    q_multipole_component,
    state_multipoles,
)
from polarqfi.polarization.sphere import SphereGrid, husimi_q, q_dop, wehrl_entropy
