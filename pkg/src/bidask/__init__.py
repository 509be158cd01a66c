"""Two-level (bid/ask) price-operator model of spread formation.

Bid and ask are the eigenvalues of a fluctuating Hermitian 2x2 operator.
The package simulates that operator, evaluates and samples the spread law,
propagates the bid/ask amplitudes, calibrates the model to spreads and
order-book populations, and reports mid-price and spread risk.
"""

from .calibration import (FitOptions, FitResult, fit_phase_scale, fit_spread_params,
                          model_population_histogram, negative_log_likelihood)
from .dynamics import (AmplitudeState, PopulationHistogram, Trajectory, gamma_ratio_check,
                       population_histogram, simulate_trajectory, step_amplitudes,
                       theoretical_population_pdf)
from .errors import (BidAskError, EmptySeriesError, InvalidInputError, InvalidStateError,
                     NonConvergenceError, ParseError)
from .market import (BookSnapshot, ObservableSeries, OhlcTick, effective_levels,
                     extract_observables, load_book_series, load_ohlc, population_from_sizes)
from .model import (EigenPrices, ModelParams, PriceOperator2x2, Shocks, build_operator,
                    eigen_prices, spread_realization, step_mid)
from .risk import RiskReport, mid_volatility, risk_report, spread_var95
from .spread import (PdfCurve, SpreadDistParams, log_bessel_i0, pdf_curve, sample_spreads,
                     spread_pdf_general, spread_pdf_zero_mean)

__version__ = "0.1.0"
