# Sampler diagnostics and validation oracles
from .ess import ess_batch_means, ess_report
from .mala import mala_baseline
from .models import EssReport, EulerOracleConfig, EulerOracleResult, MalaResult, QQResult
from .oracles import euler_eball, gaussian_bridge_marginal, ks_statistic, qq_data
from .reports import write_ess_report, write_json, write_qq, write_rows

__all__ = [
    "EssReport",
    "EulerOracleConfig",
    "EulerOracleResult",
    "MalaResult",
    "QQResult",
    "ess_batch_means",
    "ess_report",
    "euler_eball",
    "gaussian_bridge_marginal",
    "ks_statistic",
    "mala_baseline",
    "qq_data",
    "write_ess_report",
    "write_json",
    "write_qq",
    "write_rows",
]
