"""
Key-value configuration files for pipeline commands

A file holds one KEY=value per line, '#' starts a comment. Files are read with
python-decouple, so an environment variable of the same name overrides the
file entry. Values come back as raw strings; the serializers of each app do
the casting and validation.
"""

import shutil
from pathlib import Path
from decouple import Config, RepositoryEmpty, RepositoryEnv
from django.core.exceptions import ValidationError


class ConfigFile:
    """
    A key-value configuration file (or an empty one when no path is given)
    """

    def __init__(self, path=None):
        self.path = Path(path) if path else None

        if self.path is None:
            repository = RepositoryEmpty()
        elif not self.path.is_file():
            raise ValidationError(f"Configuration file not found: {self.path}")
        else:
            repository = RepositoryEnv(str(self.path))

        self._config = Config(repository)

    def __contains__(self, key):
        return key in self._config.repository

    def get(self, key, default=None, cast=None):
        """Read one value, falling back to default when the key is absent"""
        if key not in self:
            return default
        value = self._config(key)
        return cast(value) if cast else value

    def values_for(self, field_names):
        """
        Collect raw values for serializer fields

        Args:
            field_names (iterable): lower-case serializer field names

        Returns:
            dict: field name -> raw string for every key present (KEY = NAME.upper())
        """
        return {
            name: self._config(name.upper())
            for name in field_names
            if name.upper() in self
        }

    def echo_to(self, directory, filename="train.conf"):
        """Copy the file verbatim into a run directory"""
        if self.path is None:
            return None
        target = Path(directory) / filename
        shutil.copyfile(self.path, target)
        return target


def merge_overrides(values, overrides):
    """Apply command-line overrides (None means 'not given') on top of file values"""
    merged = dict(values)
    for key, value in overrides.items():
        if value is not None:
            merged[key] = value
    return merged


def build_from_config(serializer_class, config_file, defaults=None, overrides=None, context=None):
    """
    Validate a config section with a serializer and return serializer.save()

    Precedence: overrides (flags) > config file / environment > defaults
    """
    field_names = serializer_class().fields.keys()
    data = merge_overrides(defaults or {}, config_file.values_for(field_names))
    data = merge_overrides(data, overrides or {})
    serializer = serializer_class(data=data, context=context or {})
    serializer.is_valid(raise_exception=True)
    return serializer.save()
