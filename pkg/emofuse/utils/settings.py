from environs import Env

# Инициализация переменных окружения
env = Env()
env.read_env()

LOG_LEVEL: str = env.str("EMOFUSE_LOG_LEVEL", "INFO")
# Пустое значение отключает файловые логи (консоль остаётся)
LOG_DIR: str = env.str("EMOFUSE_LOG_DIR", "logs")
DEFAULT_SEED: int = env.int("EMOFUSE_SEED", 0)
DEFAULT_OUT: str = env.str("EMOFUSE_OUT", "runs")
