# --------------------------------------------------------------------------------------------
# Copyright (c) Microsoft Corporation.
# Licensed under the MIT License.
# --------------------------------------------------------------------------------------------

import logging


logger = logging.getLogger(__name__)


"""Keys written by the library stages."""

FAMILY_CERTIFICATES = "family_certificates"
FAMILY_SEEDS = "family_seeds"
FAMILY_ANCHOR = "family_anchor"
FAMILY_TUBE_RADIUS = "family_tube_radius"
HYPERBOLICITY_CERTIFICATES = "hyperbolicity_certificates"
HYPERBOLICITY_ANCHOR = "hyperbolicity_anchor"
CHART = "chart"
FIBER_CERTIFICATE = "fiber_certificate"
TRANSVERSAL_CERTIFICATE = "transversal_certificate"


class Blackboard:

    def __init__(self):
        self.board = {}

    def clearBoard(self):
        self.board = {}

    def setBoardVariable(self, key: str, value):
        if key == "":
            logger.warning("blackboard warning: ignoring key as empty string")
            return
        self.board[key] = value

    def hasBoardVariable(self, key: str) -> bool:
        return key in self.board

    def getBoardVariable(self, key: str):
        if key in self.board: return self.board[key]
        else:
            logger.debug("blackboard info: get on unknown variable %s", key)
            return None
