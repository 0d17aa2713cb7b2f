"""Instance families with designated spanning trees."""
from network_subsidies.generators.families import (
    E_HAT,
    AonBound,
    BinPackInstance,
    BypassLayout,
    IndepSetInstance,
    aon_path_bound,
    cycle_packing_cost,
    gen_aon_path,
    gen_binpack,
    gen_bypass,
    gen_cycle,
    gen_indepset,
    indepset_equilibrium_weight,
)
from network_subsidies.generators.sat import (
    CnfFormula,
    LabelConstants,
    LightCatalog,
    SatInstance,
    brute_force_satisfiable,
    format_dimacs,
    gen_3sat4,
    parse_dimacs,
)

__all__ = [
    "E_HAT",
    "AonBound",
    "BinPackInstance",
    "BypassLayout",
    "CnfFormula",
    "IndepSetInstance",
    "LabelConstants",
    "LightCatalog",
    "SatInstance",
    "aon_path_bound",
    "brute_force_satisfiable",
    "cycle_packing_cost",
    "format_dimacs",
    "gen_3sat4",
    "gen_aon_path",
    "gen_binpack",
    "gen_bypass",
    "gen_cycle",
    "gen_indepset",
    "indepset_equilibrium_weight",
    "parse_dimacs",
]
