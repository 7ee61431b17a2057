"""
Method manager for handling all available estimators
"""
from typing import Dict, List

from config.settings import METHOD_CONFIG
from methods.base import BaseMethod
from methods.daernn import DaernnMethod
from methods.dalinear import DalinearMethod
from methods.full import FullMethod
from methods.oracle import OracleMethod
from models.schemas import MethodName, MethodResult


class MethodManager:
    """Manages all available methods"""

    registry = {
        MethodName.DAERNN: DaernnMethod,
        MethodName.FULL: FullMethod,
        MethodName.ORACLE: OracleMethod,
        MethodName.DALINEAR: DalinearMethod,
    }

    def __init__(self):
        self.methods: Dict[MethodName, BaseMethod] = {}
        self._initialize_methods()

    def _initialize_methods(self):
        """Initialize all enabled methods"""
        for name, factory in self.registry.items():
            if METHOD_CONFIG[name.value]["enabled"]:
                self.methods[name] = factory()

    def get_method(self, name) -> BaseMethod:
        name = MethodName(name)
        if name not in self.methods:
            raise KeyError(f"Method '{name.value}' not available")
        return self.methods[name]

    def execute_method(self, name, **kwargs) -> MethodResult:
        """Execute a specific method with given parameters"""
        try:
            method = self.get_method(name)
        except (KeyError, ValueError):
            return MethodResult(success=False, result=None, error=f"Method '{name}' not found")
        return method.execute(**kwargs)

    def get_method_names(self) -> List[str]:
        """Get list of available method names"""
        return [name.value for name in self.methods]

    def has_method(self, name) -> bool:
        try:
            return MethodName(name) in self.methods
        except ValueError:
            return False

    def describe(self) -> Dict[str, str]:
        return {name.value: method.description for name, method in self.methods.items()}
