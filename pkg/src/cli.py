"""
Línea de comandos: `python -m src.cli <comando> [flags]`.

Los flags reflejan los campos de ExperimentSpec; solo los flags indicados
se pasan a la especificación, el resto toma los valores por defecto del modelo.
"""
import argparse
import sys
from typing import Any, Dict, List, Optional, Tuple

from pydantic import ValidationError

from src.app.baselines.models import Fallback
from src.app.experiments.models import BaselineName, Command, ExperimentSpec
from src.app.experiments.service import create_experiment_service
from src.app.inference.models import InitStrategy

# flag -> (sección anidada, campo)
_NESTED = {
    "init_strategy": ("engine", "init_strategy"),
    "jitter_scale": ("engine", "jitter_scale"),
    "min_prob_floor": ("engine", "min_prob_floor"),
    "elbo_check_every": ("engine", "elbo_check_every"),
    "param_tol": ("engine", "param_tol"),
    "pmf_rank": ("pmf", "rank"),
    "pmf_lr": ("pmf", "learning_rate"),
    "pmf_lambda": ("pmf", "regularization"),
    "pmf_epochs": ("pmf", "max_epochs"),
    "pmf_tol": ("pmf", "tol"),
    "pmf_seed": ("pmf", "seed"),
    "k_neighbors": ("neighbors", "k_neighbors"),
    "min_overlap": ("neighbors", "min_overlap"),
    "fallback": ("neighbors", "fallback"),
}


def _candidate(text: str) -> Tuple[int, int]:
    """'5,5' o '5x5' -> (5, 5)."""
    parts = text.lower().replace("x", ",").split(",")
    try:
        K, L = (int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"Candidato inválido '{text}'; use K,L (por ejemplo 5,5)")
    return K, L


def _k_neighbors(text: str):
    return text if text == "all" else int(text)


def _add_arguments(parser: argparse.ArgumentParser) -> None:
    data = parser.add_argument_group("datos")
    data.add_argument("--data", dest="data_path", help="Archivo u.data de MovieLens")
    data.add_argument("--scenario", type=int, choices=[5, 7, 9], help="Escenario integrado K = L")
    data.add_argument("--scenario-path", help="Escenario exportado con simulate")
    data.add_argument("--model-dir", help="Directorio de un modelo exportado (predict)")
    data.add_argument("--output-dir", help="Directorio de artefactos (por defecto results)")
    data.add_argument("--train-fraction", type=float, help="Fracción de entrenamiento de MovieLens")
    data.add_argument("--split-seed", type=int, help="Semilla de la partición")
    data.add_argument("--eta", type=float, help="Fracción observada del escenario")
    data.add_argument("--outlier-rate", type=float, help="Tasa de outliers del escenario")

    model = parser.add_argument_group("modelo")
    model.add_argument("-K", "--K", dest="K", type=int, help="Clusters de usuarios")
    model.add_argument("-L", "--L", dest="L", type=int, help="Clusters de ítems")
    model.add_argument("--alpha", type=float, nargs="+", help="Hiperparámetros de usuarios")
    model.add_argument("--beta", type=float, nargs="+", help="Hiperparámetros de ítems")
    model.add_argument("--informative-prior", action="store_true", help="Usar alpha/beta verdaderos (BM2*)")
    model.add_argument("--max-iters", type=int, help="Máximo de iteraciones")
    model.add_argument("--rel-tol", type=float, help="Umbral de cambio relativo del ELBO")
    model.add_argument("--seed", type=int, help="Semilla de ajuste y generación")
    model.add_argument("--init-strategy", choices=[s.value for s in InitStrategy])
    model.add_argument("--jitter-scale", type=float)
    model.add_argument("--min-prob-floor", type=float)
    model.add_argument("--elbo-check-every", type=int)
    model.add_argument("--param-tol", type=float, help="Cambio máximo de parámetros para converger")
    model.add_argument("--export-graph", action="store_true", help="Exportar la lista de aristas")
    model.add_argument("--graph-user-clusters", type=int, nargs="+", help="Clusters de usuarios de la subred")
    model.add_argument("--graph-item-clusters", type=int, nargs="+", help="Clusters de ítems de la subred")

    baselines = parser.add_argument_group("baselines")
    baselines.add_argument("--baselines", nargs="+", choices=[b.value for b in BaselineName])
    baselines.add_argument("--round-baselines", action="store_true", help="Redondear a la escala")
    baselines.add_argument("--pmf-rank", type=int)
    baselines.add_argument("--pmf-lr", type=float)
    baselines.add_argument("--pmf-lambda", type=float)
    baselines.add_argument("--pmf-epochs", type=int)
    baselines.add_argument("--pmf-tol", type=float)
    baselines.add_argument("--pmf-seed", type=int)
    baselines.add_argument("--k-neighbors", type=_k_neighbors, help="Número de vecinos o 'all'")
    baselines.add_argument("--min-overlap", type=int)
    baselines.add_argument("--fallback", choices=[f.value for f in Fallback])

    study = parser.add_argument_group("validación cruzada y bench")
    study.add_argument("--candidates", type=_candidate, nargs="+", help="Candidatos K,L")
    study.add_argument("--folds", dest="n_folds", type=int)
    study.add_argument("--cv-seeds", type=int, nargs="+")
    study.add_argument("--n-jobs", type=int)
    study.add_argument("--replicates", type=int)
    study.add_argument("--etas", type=float, nargs="+")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="python -m src.cli",
                                     description="Predicción de calificaciones con BM2")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in Command:
        sub = subparsers.add_parser(command.value, argument_default=argparse.SUPPRESS)
        _add_arguments(sub)
    return parser


def spec_from_args(args: argparse.Namespace) -> ExperimentSpec:
    """Convierte los flags indicados en un ExperimentSpec validado."""
    fields: Dict[str, Any] = {}
    nested: Dict[str, Dict[str, Any]] = {}
    for name, value in vars(args).items():
        if name in _NESTED:
            section, key = _NESTED[name]
            nested.setdefault(section, {})[key] = value
        else:
            fields[name] = value
    return ExperimentSpec(**fields, **nested)


def _print_metrics(metrics: Dict[str, Any]) -> None:
    for model, report in metrics.items():
        line = f"  {model:<14} MAE={report.mae:.4f}  MSE={report.mse:.4f}  AR={report.ar:.4f}"
        if report.mae_se is not None:
            line += f"  (SE {report.mae_se:.4f} / {report.mse_se:.4f} / {report.ar_se:.4f})"
        print(line)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = spec_from_args(args)
    except ValidationError as e:
        print(f"Error: especificación inválida\n{e}", file=sys.stderr)
        return 1

    result = create_experiment_service().run(spec)
    if not result["success"]:
        print(result["error"], file=sys.stderr)
        return 1

    print(result["message"])
    _print_metrics(result.get("metrics", {}))
    print(f"Artefactos en: {result['output_dir']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
