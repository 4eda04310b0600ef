from .spec import ArgumentSpec
