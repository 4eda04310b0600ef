from . import path

sep = "/"


def getcwd():
    return "/"


def listdir(path="."):
    return []
