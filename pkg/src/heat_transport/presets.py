from __future__ import annotations  # 型注釈の前方参照を許可するため

"""
Named experiment documents: the fig2..fig10 parameter sets and a few coupling variants.

- fig2..fig4: resonant qubits, XX_YY system and bath couplings, T1=5, T2=1, gamma in {0.2, 0.5, 0.8}
- fig5..fig8: off-resonant qubits (omega1=2), ZZ system + XX bath, gamma=0.3
- fig9..fig10: ZX system + XX bath, gamma=0.5, T=(10, 1)
- zz_system_exchange, zz_bath_exchange, zz_both_exchange: the other energy-preserving coupling combinations of the resonant setup
- offresonant_exchange: off-resonant qubits under the resonant-setup couplings
- fig5..fig10 and offresonant_exchange converge to run.tol = SMALL_CURRENT_TOL
"""

import copy  # プリセット文書を呼び出し側で変更されないようにするため

from .config import ExperimentConfig, config_from_mapping  # 検証は通常の設定と同じ経路を通す

_RESONANT_MODEL = {  # 共鳴2量子ビット
    "omega0": 1.0,
    "omega1": 1.0,
    "omega2": 1.0,
    "omega0_tau": 0.1,
    "T1": 5.0,
    "T2": 1.0,
    "sys_coupling": "XX_YY",
    "bath_coupling": "XX_YY",
}
_RESONANT_SWEEP = {"variable": "delta", "start": 0.0, "stop": 2.0, "points": 50}
_GAMMA_SERIES = [{"gamma": 0.2}, {"gamma": 0.5}, {"gamma": 0.8}]

_OFFRES_MODEL = {  # 非共鳴2量子ビット（omega1 = 2 omega0）
    **_RESONANT_MODEL,
    "omega1": 2.0,
    "gamma": 0.3,
    "sys_coupling": "ZZ",
    "bath_coupling": "XX",
}
_ASYMMETRIC_SWEEP = {"variable": "delta", "start": 0.02, "stop": 1.0, "points": 50}
_FORWARD_GRADIENTS = [  # T1=10 と T2 の組
    {"T1": 10.0, "T2": 0.1},
    {"T1": 10.0, "T2": 4.0},
    {"T1": 10.0, "T2": 8.0},
]

_ANISOTROPIC_MODEL = {
    **_RESONANT_MODEL,
    "gamma": 0.5,
    "T1": 10.0,
    "T2": 1.0,
    "sys_coupling": "ZX",
    "bath_coupling": "XX",
}

_BOTH_MODES = ["Full", "LocalApprox"]
SMALL_CURRENT_TOL = 1e-13  # 非共鳴・異方結合の電流は1e-9程度まで小さい

_PRESETS: dict[str, dict] = {
    "fig2": {
        "model": _RESONANT_MODEL,
        "sweep": _RESONANT_SWEEP,
        "series": _GAMMA_SERIES,
        "run": {"modes": _BOTH_MODES, "outputs": ["J_h", "W_sw"]},
    },
    "fig3": {
        "model": _RESONANT_MODEL,
        "sweep": _RESONANT_SWEEP,
        "series": _GAMMA_SERIES,
        "run": {"modes": _BOTH_MODES, "outputs": ["trace_distance"]},
    },
    "fig4": {
        "model": _RESONANT_MODEL,
        "sweep": _RESONANT_SWEEP,
        "series": _GAMMA_SERIES,
        "run": {"modes": ["Full"], "outputs": ["discord"]},
    },
    "fig5": {
        "model": _OFFRES_MODEL,
        "sweep": _ASYMMETRIC_SWEEP,
        "series": _FORWARD_GRADIENTS,
        "run": {"modes": ["Full"], "outputs": ["J_h", "rectification"], "tol": SMALL_CURRENT_TOL},
    },
    "fig6": {
        "model": _OFFRES_MODEL,
        "sweep": _ASYMMETRIC_SWEEP,
        "series": [
            {"T1": 10.0, "T2": 10.0},
            {"T1": 10.0, "T2": 5.0},
            {"T1": 5.0, "T2": 10.0},
            {"T1": 0.05, "T2": 10.0},
        ],
        "run": {"modes": ["Full"], "outputs": ["J_h", "W_sw"], "tol": SMALL_CURRENT_TOL},
    },
    "fig7": {
        "model": _OFFRES_MODEL,
        "sweep": _ASYMMETRIC_SWEEP,
        "series": _FORWARD_GRADIENTS,
        "run": {"modes": _BOTH_MODES, "outputs": ["trace_distance"], "tol": SMALL_CURRENT_TOL},
    },
    "fig8": {
        "model": _OFFRES_MODEL,
        "sweep": _ASYMMETRIC_SWEEP,
        "series": _FORWARD_GRADIENTS,
        "run": {"modes": ["Full"], "outputs": ["discord"], "tol": SMALL_CURRENT_TOL},
    },
    "fig9": {
        "model": _ANISOTROPIC_MODEL,
        "sweep": _ASYMMETRIC_SWEEP,
        "run": {"modes": _BOTH_MODES, "outputs": ["J_h", "W_sw", "rectification"], "tol": SMALL_CURRENT_TOL},
    },
    "fig10": {
        "model": _ANISOTROPIC_MODEL,
        "sweep": _ASYMMETRIC_SWEEP,
        "run": {"modes": ["Full"], "outputs": ["discord"], "tol": SMALL_CURRENT_TOL},
    },
    "zz_system_exchange": {
        "model": {**_RESONANT_MODEL, "gamma": 0.5, "sys_coupling": "XX_YY_ZZ", "bath_coupling": "XX_YY"},
        "sweep": _RESONANT_SWEEP,
        "run": {"modes": _BOTH_MODES, "outputs": ["J_h", "W_sw", "trace_distance", "discord"]},
    },
    "zz_bath_exchange": {
        "model": {**_RESONANT_MODEL, "gamma": 0.5, "sys_coupling": "XX_YY", "bath_coupling": "XX_YY_ZZ"},
        "sweep": _RESONANT_SWEEP,
        "run": {"modes": _BOTH_MODES, "outputs": ["J_h", "W_sw", "trace_distance", "discord"]},
    },
    "zz_both_exchange": {
        "model": {**_RESONANT_MODEL, "gamma": 0.5, "sys_coupling": "XX_YY_ZZ", "bath_coupling": "XX_YY_ZZ"},
        "sweep": _RESONANT_SWEEP,
        "run": {"modes": _BOTH_MODES, "outputs": ["J_h", "W_sw", "trace_distance", "discord"]},
    },
    "offresonant_exchange": {
        "model": {**_RESONANT_MODEL, "omega1": 2.0, "gamma": 0.3, "T1": 10.0, "T2": 0.1},
        "sweep": _ASYMMETRIC_SWEEP,
        "run": {"modes": _BOTH_MODES, "outputs": ["J_h", "W_sw", "rectification"], "tol": SMALL_CURRENT_TOL},
    },
}

FIGURE_NAMES = tuple(f"fig{n}" for n in range(2, 11))
PRESET_NAMES = tuple(_PRESETS)


def preset_document(name: str) -> dict:
    """Deep copy of the YAML-shaped document behind a preset."""
    if name not in _PRESETS:
        raise ValueError(f"Unknown preset: {name}. Expected one of {', '.join(PRESET_NAMES)}.")
    document = copy.deepcopy(_PRESETS[name])
    document["name"] = name
    document["initial_state"] = "ket11"
    return document


def preset_figure(name: str) -> ExperimentConfig:
    """Validated ExperimentConfig of a named preset."""
    document = preset_document(name)
    return config_from_mapping(document, context=f"preset {name}")
