import yaml


class ChainedException(Exception):
    def __str__(self) -> str:
        return super().__str__() + ("; " + str(self.__cause__) if self.__cause__ else "")


class ConfigLoadError(ChainedException):
    pass


class InvalidConfigError(ChainedException):
    pass


def load_file(path: str) -> str:
    try:
        with open(path, "r") as fd:
            return fd.read()
    except Exception as e:
        raise ConfigLoadError(f"Failed to load file: {path}") from e


def parse_config(content: str) -> dict:
    """
    Parse a configuration document. JSON is accepted as well since every JSON document is also valid YAML.
    """
    try:
        config = yaml.load(content, Loader=yaml.FullLoader)
        if isinstance(config, dict):
            return config
        raise InvalidConfigError("Failed to parse configuration, expected a mapping")
    except yaml.YAMLError as e:
        raise InvalidConfigError("Failed to parse configuration") from e


def parse_config_file(path: str) -> dict:
    content = load_file(path)
    try:
        return parse_config(content)
    except Exception as e:
        raise ConfigLoadError(f"Error while parsing configuration at path: {path}") from e
