"""
Text templates for the headers and reports written by the CLI.
"""

SPACETIME_HEADER = ["t", "z", "re_a_plus", "im_a_plus", "re_a_minus", "im_a_minus",
                    "abs_a_plus", "abs_a_minus", "re_p12", "im_p12"]

METRICS_HEADER = ["t", "area_plus", "area_minus", "energy_plus", "energy_minus",
                  "centroid", "width", "conversion", "atomic_norm"]

DISPERSION_HEADER = ["k", "re_omega", "im_omega", "re_chi_minus", "im_chi_minus"]

ANALYTIC_HEADER = ["t", "z_plus", "z_minus", "l", "D", "area_ratio", "P"]

DIAGNOSTICS_HEADER = ["t", "norm_plus", "norm_minus", "p12_max", "cfl_margin"]

MANIFEST_PREAMBLE = """# tcsl run manifest
# Scenario keys re-load as a scenario file; run.* and provenance.* are informational.
"""

VALIDATION_FAILED = """Scenario '{scenario}' failed validation:
{report}"""

RUN_SUMMARY = """[RUN] {solver} solver finished for '{scenario}'
[RUN]   snapshots: {n_snapshots} ({t_first:.9g} .. {t_last:.9g})
[RUN]   written to: {out_dir}"""
