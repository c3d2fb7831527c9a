"""finprod: Hoeffding decompositions, martingale Hardy norms and decoupling
functionals on finite product probability spaces.

Exact rational arithmetic backs the combinatorial operator identities;
float and complex modes back the Monte Carlo and torus machinery.
"""

from .space import (
    COMPLEX,
    RATIONAL,
    REAL,
    FiniteFactor,
    GuardExceededError,
    ProductSpace,
    SpaceMismatchError,
    TensorFunction,
    conditional_expectation,
    constant_function,
    coordinate_function,
    expectation,
    finite_factor,
    function_from_json,
    function_to_json,
    indicator_function,
    inner_product,
    lp_norm,
    make_product_space,
    tensor_function,
    tensor_power,
    tensor_product,
    uniform_factor,
    uniform_space,
)
from .hoeffding import (
    HoeffdingComponents,
    hoeffding_component,
    hoeffding_decompose,
    project_multiplicity,
    tensor_power_projection_check,
    verify_multinomial_identity,
    verify_q_identity,
)
from .walsh import (
    WalshSpectrum,
    inverse_walsh_hadamard,
    khintchine_ratio,
    walsh_hadamard_transform,
    walsh_projection,
)
from .torus import (
    DirichletPolynomial,
    TorusSpectrum,
    bohr_drop,
    bohr_lift,
    dirichlet_prime_projection,
    inverse_spectrum,
    mlast_member,
    project_mlast,
    spectrum,
    torus_space,
)
from .martingale import (
    DifferenceFamily,
    DifferenceSet,
    bmo_norm,
    double_family,
    family_differences,
    h1_norm,
    hp_norm,
    lepingle_check,
    linear_family,
    mlast_family,
    reversed_family,
    square_and_maximal,
    validate_family,
)
from .decoupling import (
    AdaptedTuple,
    LambdaSequence,
    adapted_tuple,
    lambda_recursion,
    multi_decoupled_right,
    translate_op,
    zinn_left,
    zinn_right,
    zinn_right_mc,
)

__version__ = "0.1.0"
