import json
import logging
import os
import time

from platformdirs import PlatformDirs
from securetext.errors import ConfigError
from securetext.params import (
    APPAUTHOR,
    APPNAME,
    CONFIG_KEYS,
    DATA_DIRNAME,
    REPORT_FILENAME,
)


logger = logging.getLogger(__name__)

_PLATFORMDIRS = PlatformDirs(appname=APPNAME, appauthor=APPAUTHOR)


def to_text(text, filepath):
    with open(filepath, "w", encoding="utf-8") as f:
        f.write(text)


class FileManager:
    """ Support careful OS-independent storage of files. """
    def __init__(self, path, bad_directory_hint="File I/O defaulting to current working directory. {}"):
        self.path = path
        self.default_path = os.path.abspath(os.curdir)
        self.bad_directory_hint = bad_directory_hint
        self._try_to_create_directory()

    def _try_to_create_directory(self):
        if os.path.isdir(self.path):
            pass
        else:
            try:
                os.makedirs(self.path)
            except OSError as e:
                logger.warning(self.bad_directory_hint.format(e))

    def _try_to_save(self, text, filename):
        """ Return the path written to, or None if no location worked. """
        for directory in (self.path, self.default_path):
            filepath = os.path.join(directory, filename)
            try:
                to_text(text, filepath)
            except OSError as e:
                logger.warning("File: %s could not be saved in %s. %s", filename, directory, e)
            else:
                logger.info("File: %s saved.", filepath)
                return filepath
        return None


class ReportManager(FileManager):
    """ Wraps saving benchmark reports under the user data directory. """
    def __init__(self, path=None):
        super().__init__(path=_PLATFORMDIRS.user_data_dir if (path is None) else path,
                         bad_directory_hint="Report file I/O defaulting to current working directory. {}")

    def get_report_filename(self, stamp=None):
        stamp = time.strftime("%Y%m%d-%H%M%S") if (stamp is None) else stamp
        return REPORT_FILENAME.format(stamp)

    def save(self, report, stamp=None):
        return self._try_to_save(report.to_csv(), self.get_report_filename(stamp))


def load_config(path):
    """
    Read a JSON object of overrides for the defaults in params. Keys
    outside CONFIG_KEYS and non-integer values (except session_timeout)
    are configuration errors.
    """
    if (path is None):
        return dict()
    try:
        with open(path, encoding="utf-8") as f:
            config = json.load(f)
    except OSError as e:
        raise ConfigError(reason="cannot read {} ({})".format(path, e))
    except ValueError as e:
        raise ConfigError(reason="{} is not valid JSON ({})".format(path, e))
    if not(isinstance(config, dict)):
        raise ConfigError(reason="{} must hold a JSON object".format(path))
    unknown = sorted(set(config) - CONFIG_KEYS)
    if unknown:
        raise ConfigError(reason="unknown keys {}".format(", ".join(unknown)))
    for key, value in config.items():
        numeric = (int, float) if (key == "session_timeout") else (int,)
        if isinstance(value, bool) or not(isinstance(value, numeric)):
            raise ConfigError(reason="{} must be a number, got {!r}".format(key, value))
    return config


def bundled_path(filename):
    """ Path of a file shipped in securetext/data. """
    return os.path.join(os.path.dirname(os.path.abspath(__file__)), DATA_DIRNAME, filename)
