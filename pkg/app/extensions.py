import logging
from pathlib import Path

from tqdm import tqdm


class LogSetup:
    """Root logging configuration plus an optional per-run log file"""

    def __init__(self):
        self.level = logging.INFO
        self.format = '%(asctime)s %(levelname)s %(name)s: %(message)s'
        self._file_handler = None

    def init_app(self, settings):
        self.level = getattr(logging, str(settings.LOG_LEVEL).upper(), logging.INFO)
        self.format = settings.LOG_FORMAT
        root = logging.getLogger()
        root.setLevel(self.level)
        if not any(getattr(h, '_phkit', False) for h in root.handlers):
            handler = logging.StreamHandler()
            handler._phkit = True
            root.addHandler(handler)
        for handler in root.handlers:
            if getattr(handler, '_phkit', False):
                handler.setFormatter(logging.Formatter(self.format))
                handler.setLevel(self.level)

    def attach(self, directory):
        """Mirror log records into ``directory/run.log`` until ``detach``"""
        self.detach()
        path = Path(directory) / 'run.log'
        path.parent.mkdir(parents=True, exist_ok=True)
        handler = logging.FileHandler(path, encoding='utf-8')
        handler.setFormatter(logging.Formatter(self.format))
        handler.setLevel(self.level)
        logging.getLogger().addHandler(handler)
        self._file_handler = handler
        return path

    def detach(self):
        if self._file_handler is not None:
            logging.getLogger().removeHandler(self._file_handler)
            self._file_handler.close()
            self._file_handler = None


class Progress:
    """tqdm factory switched off by the testing profile"""

    def __init__(self):
        self.enabled = True

    def init_app(self, settings):
        self.enabled = bool(settings.PROGRESS)

    def __call__(self, iterable=None, total=None, desc=None):
        return tqdm(iterable, total=total, desc=desc, disable=not self.enabled, leave=False)


# Initialize extensions
log_setup = LogSetup()
progress = Progress()
