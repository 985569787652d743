"""Bundled parameter presets for one-command reproduction runs.

Each preset is a raw config mapping (lab units, see rabispec.config) pinned
to a published operating point of the device:

fig2b  low-power spectroscopy trace across the two lines near the resonator
       frequency at the flux symmetry point (weak drive, fitted rates)
fig5b  high-power (flux, frequency) map around the sign-changing transition
fig7a  driven population dynamics from the first excited state, drive
       stronger than the qubit decay (oscillatory transfer)
fig7b  same scenario at weak drive (smooth transfer)
fig4e  sign-preserving over sign-changing matrix-element ratio versus
       normalized coupling strength
"""

PRESETS = {
    "fig2b": {
        "omega_r_ghz": 8.13, "delta_ghz": 4.2, "i_p_na": 500.0, "g_ghz": 0.82,
        "flux_offset_mphi0": 0.0, "n_fock": 6,
        "temperature_mk": 90.0, "gamma_r_mhz": 1.0, "gamma_qb_mhz": 15.0,
        "a_qb_mhz": 12.0, "a_r_mhz": 12.0,
        "drive_start_ghz": 7.8, "drive_stop_ghz": 8.5, "drive_points": 71,
        "window_periods": 50, "rel_tol": 1e-5,
    },
    "fig5b": {
        "omega_r_ghz": 8.13, "delta_ghz": 4.2, "i_p_na": 500.0, "g_ghz": 0.82,
        "n_fock": 6,
        "temperature_mk": 100.0, "gamma_r_mhz": 1.0, "gamma_qb_mhz": 15.0,
        "a_qb_mhz": 50.0, "a_r_mhz": 50.0,
        "flux_start_mphi0": -1.0, "flux_stop_mphi0": 1.0, "flux_points": 21,
        "drive_start_ghz": 11.9, "drive_stop_ghz": 12.8, "drive_points": 46,
        "window_periods": 50, "rel_tol": 1e-5,
    },
    "fig7a": {
        "omega_r_ghz": 8.13, "delta_ghz": 4.2, "i_p_na": 500.0, "g_ghz": 0.82,
        "flux_offset_mphi0": 0.0, "n_fock": 6,
        "temperature_mk": 90.0, "gamma_r_mhz": 0.1, "gamma_qb_mhz": 15.0,
        "a_qb_mhz": 90.0, "a_r_mhz": 90.0,
        "drive_ghz": 4.12, "t_end_ns": 150.0, "samples": 600,
        "initial_state": "1-",
    },
    "fig7b": {
        "omega_r_ghz": 8.13, "delta_ghz": 4.2, "i_p_na": 500.0, "g_ghz": 0.82,
        "flux_offset_mphi0": 0.0, "n_fock": 6,
        "temperature_mk": 90.0, "gamma_r_mhz": 0.1, "gamma_qb_mhz": 15.0,
        "a_qb_mhz": 12.0, "a_r_mhz": 12.0,
        "drive_ghz": 4.12, "t_end_ns": 150.0, "samples": 600,
        "initial_state": "1-",
    },
    "fig4e": {
        "omega_r_ghz": 8.13, "delta_ghz": 4.22, "i_p_na": 500.0, "g_ghz": 0.813,
        "flux_offset_mphi0": 0.0, "n_fock": 6, "model": "rabi",
        "g_over_wr": [0.02, 0.04, 0.06, 0.08, 0.10, 0.12, 0.16, 0.20, 0.25, 0.30],
    },
}
