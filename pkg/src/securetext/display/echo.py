from securetext.params import PARTY_NAMES
from securetext.pipeline.session import ClassificationSession
from securetext.display.text import (
    display_title,
    display_phase,
)


class Echo:
    """
    Mixin announcing each phase of a session once it has run. Kept out
    of ClassificationSession so batches and benchmarks never echo.
    """
    def run_phase(self, name, function):
        super().run_phase(name, function)
        record = self.transport.phases[name]
        display_phase(self.job.role, name, record["seconds"], record["rounds"])


class EchoSession(Echo, ClassificationSession):
    def play(self, shake=True):
        display_title("{} session".format(PARTY_NAMES[self.job.role]))
        return super().play(shake=shake)
