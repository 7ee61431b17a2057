"""
Data-augmented expectile regression neural network
"""
from core import daernn
from methods.base import BaseMethod, daernn_config
from models.schemas import MethodName


class DaernnMethod(BaseMethod):

    def __init__(self):
        super().__init__(MethodName.DAERNN, "Data-augmented expectile regression neural network")

    def _fit(self, data, settings):
        fitted = daernn.fit(data, daernn_config(settings, data.p))
        return fitted.predictor(), list(fitted.history)
