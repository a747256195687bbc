# --------------------------------------------------------------------------------------------
# Copyright (c) Microsoft Corporation.
# Licensed under the MIT License.
# --------------------------------------------------------------------------------------------

path = "librate.library."

"""
To use alternative stages, import default_library.library and edit fields.
String paths are used instead of instances so that the library can be named in a run configuration.
"""

library = {

    "family": {
        "decoder": path + "family.family.FamilyDecoder",
        "src":     path + "family.family.Family"
    },

    "hyperbolicity": {
        "decoder": path + "hyperbolicity.hyperbolicity.HyperbolicityDecoder",
        "src":     path + "hyperbolicity.hyperbolicity.Hyperbolicity"
    },

    "fibers": {
        "decoder": path + "fibers.fibers.FibersDecoder",
        "src":     path + "fibers.fibers.Fibers",
        "src_configs": {"chart_self_test": True}
    },

    "transversal": {
        "decoder": path + "transversal.transversal.TransversalDecoder",
        "src":     path + "transversal.transversal.Transversal"
    }
}
