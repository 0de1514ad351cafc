import configparser
import os

# Define default settings in this dictionary
default_settings = {
    "limits": {
        "element_budget": 10_000_000,
        "max_bits": 8192,
    },
    "precision": {
        "bits": 256,
    },
    "run": {
        "threads": 1,
        "seed": 0,
        "format": "human",
    },
    "pipeline": {
        "delta": 1.0,
        "eps": 0.05,
        "eni_constant": 1.0,
        # Effective irrationality exponent of log 2 / log 3
        "beta": 5.116201,
    },
    "digits": {
        "eps": 0.05,
        "lemma4_c": 0.5,
    },
    "harmonics": {
        "tolerance": 1e-6,
        "relative_tolerance": 1e-9,
    },
    "regression": {
        "path": "furst-regression.csv",
    },
}

# Read config file with defaults
main_config = configparser.ConfigParser()
main_config.read_dict(default_settings)
main_config.read("furst.ini")

# Environment variables take precedence over the .ini file
for env_name, section, option in (
    ("FURST_THREADS", "run", "threads"),
    ("FURST_ELEMENT_BUDGET", "limits", "element_budget"),
    ("FURST_BITS", "precision", "bits"),
    ("FURST_REGRESSION_FILE", "regression", "path"),
):
    env_value = os.getenv(env_name)
    if env_value:
        main_config.set(section, option, env_value)


def element_budget() -> int:
    return main_config.getint("limits", "element_budget")


def default_bits() -> int:
    return main_config.getint("precision", "bits")


def max_bits() -> int:
    return main_config.getint("limits", "max_bits")


def thread_count() -> int:
    return max(1, main_config.getint("run", "threads"))
