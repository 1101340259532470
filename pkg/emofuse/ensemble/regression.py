"""
Обучение весов моделей и поправок классов линейной регрессией:
для каждой пары (видео v, класс c) строка признаков [L_{1,v,c}, ..., L_{M,v,c}, onehot(c)]
и цель Y_{v,c} = [label_v == c]. Решение - нормальные уравнения с ридж-добавкой.
"""
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np
from sklearn.model_selection import KFold

from maps.classes import NUM_CLASSES
from utils.errors import ContractError, RegressionError
from utils.logger import fusion_logger

RIDGE = 1e-8
MAX_CONDITION = 1e15


@dataclass
class RegressionWeights:
    beta: np.ndarray
    gamma: np.ndarray
    cv_accuracy: float = float("nan")
    fold_accuracies: List[float] = field(default_factory=list)

    def scores(self, logits: np.ndarray) -> np.ndarray:
        """logits M×V×7 -> V×7"""
        if logits.shape[0] != len(self.beta):
            raise ContractError(f"regression was fit on {len(self.beta)} models, got {logits.shape[0]}")
        return np.tensordot(self.beta, logits, axes=(0, 0)) + self.gamma


def design_matrix(logits: np.ndarray) -> np.ndarray:
    """M×V×7 -> (V·7)×(M+7)"""
    models, videos, classes = logits.shape
    model_columns = logits.transpose(1, 2, 0).reshape(videos * classes, models)
    class_columns = np.tile(np.eye(classes), (videos, 1))
    return np.hstack([model_columns, class_columns])


def targets(labels: np.ndarray) -> np.ndarray:
    y = np.zeros((len(labels), NUM_CLASSES))
    y[np.arange(len(labels)), labels] = 1.0
    return y.reshape(-1)


def solve_normal_equations(X: np.ndarray, y: np.ndarray, ridge: float = RIDGE) -> np.ndarray:
    A = X.T @ X + ridge * np.eye(X.shape[1])
    if not np.isfinite(A).all() or np.linalg.cond(A) > MAX_CONDITION:
        raise RegressionError("regression system is singular even with the ridge term")
    try:
        theta = np.linalg.solve(A, X.T @ y)
    except np.linalg.LinAlgError as e:
        raise RegressionError(f"regression solve failed: {e}") from None
    if not np.isfinite(theta).all():
        raise RegressionError("regression produced non-finite weights")
    return theta


def fit(logits: np.ndarray, labels: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    theta = solve_normal_equations(design_matrix(logits), targets(labels))
    models = logits.shape[0]
    return theta[:models], theta[models:]


def learn_regression(logits: np.ndarray, labels, k: int = 5) -> RegressionWeights:
    """
    Args:
        logits: M×V×7 логиты моделей (уже перемасштабированные, если нужно)
        labels: Метки V видео
        k: Число фолдов кросс-валидации (без перемешивания)

    Returns:
        Веса, переобученные на всех данных, и точность k-fold CV
    """
    if any(label is None for label in labels):
        raise ContractError("regression weights need labelled logs")
    labels = np.asarray(labels, dtype=np.int64)
    videos = logits.shape[1]
    if k < 2:
        raise ContractError(f"cross-validation needs at least 2 folds, got {k}")
    if videos < k:
        raise ContractError(f"{videos} videos cannot be split into {k} folds")

    correct = 0
    fold_accuracies = []
    for fold, (train_idx, test_idx) in enumerate(KFold(n_splits=k, shuffle=False).split(np.arange(videos))):
        beta, gamma = fit(logits[:, train_idx], labels[train_idx])
        held_out = RegressionWeights(beta, gamma).scores(logits[:, test_idx])
        hits = int((np.argmax(held_out, axis=1) == labels[test_idx]).sum())
        correct += hits
        fold_accuracies.append(hits / len(test_idx))
        fusion_logger.debug(f"Fold {fold + 1}/{k}: {len(test_idx)} videos, accuracy {hits / len(test_idx):.4f}")

    beta, gamma = fit(logits, labels)
    result = RegressionWeights(beta=beta, gamma=gamma, cv_accuracy=correct / videos, fold_accuracies=fold_accuracies)
    fusion_logger.info(f"Regression weights: beta={np.round(beta, 4).tolist()} cv_accuracy={result.cv_accuracy:.4f}")
    return result
