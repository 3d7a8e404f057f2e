"""Gas channel identifiers, units, and analyzer full-scale ranges."""

from __future__ import annotations

import enum


class Unit(enum.Enum):
    PPM = "ppm"
    PERCENT = "percent"
    CELSIUS = "celsius"


class GasId(enum.Enum):
    NO = "no"
    NO2 = "no2"
    NOX = "nox"
    CO = "co"
    CO2 = "co2"
    O2 = "o2"
    SO2 = "so2"
    CH4 = "ch4"
    H2S = "h2s"
    T_AIR = "t_air"
    T_GAS = "t_gas"

    @property
    def key(self) -> str:
        return self.value

    @classmethod
    def from_key(cls, key: str) -> "GasId":
        return cls(key.lower())


GAS_UNITS: dict[GasId, Unit] = {
    GasId.NO: Unit.PPM,
    GasId.NO2: Unit.PPM,
    GasId.NOX: Unit.PPM,
    GasId.CO: Unit.PPM,
    GasId.SO2: Unit.PPM,
    GasId.CH4: Unit.PPM,
    GasId.H2S: Unit.PPM,
    GasId.CO2: Unit.PERCENT,
    GasId.O2: Unit.PERCENT,
    GasId.T_AIR: Unit.CELSIUS,
    GasId.T_GAS: Unit.CELSIUS,
}

# Analyzer full-scale ranges per channel.  The CO bound is not published for
# this analyzer class; 10000 ppm is a permissive electrochemical-cell limit.
# NOX is derived (NO + NO2) so its bound is the sum of the two source bounds.
GAS_RANGES: dict[GasId, tuple[float, float]] = {
    GasId.NO: (0.0, 5000.0),
    GasId.NO2: (0.0, 1000.0),
    GasId.NOX: (0.0, 6000.0),
    GasId.CO: (0.0, 10000.0),
    GasId.CO2: (0.0, 50.0),
    GasId.O2: (0.0, 25.0),
    GasId.SO2: (0.0, 5000.0),
    GasId.CH4: (0.0, 50000.0),
    GasId.H2S: (0.0, 500.0),
    GasId.T_AIR: (-20.0, 120.0),
    GasId.T_GAS: (-20.0, 1250.0),
}

# Gases that get target vectors in datasets; order fixes report row order
# and the y_* column order of exported dataset CSVs.
MODELED_GASES: tuple[GasId, ...] = (
    GasId.CO,
    GasId.NO,
    GasId.NO2,
    GasId.NOX,
    GasId.CO2,
)
