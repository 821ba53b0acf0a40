from .version import __version__
from .exception import (AmoLabException, AmoLabFrequencyException,
    AmoLabOperatorException, AmoLabGreenException, AmoLabResonanceException,
    AmoLabLocalizationException, AmoLabConfigException)
from .frequency import (FrequencySpec, golden, silver, liouville_spec,
    parse_frequency, convergents, estimate_beta, beta_proxy,
    construct_liouville, reduce_mod_1)
from .operator import ModelParams, Box, det_p, growth_rate, in_A
from .green import (green_cramer, green_direct, classify_regular,
    block_expand, iterate_expansion, StopRule)
from .resonance import (classify_site, uniformity_product, sine_sum_check,
    is_exceptional_phase)
from .localization import Selector, eigensolve, fit_decay, lyapunov
