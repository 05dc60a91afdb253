import os


def read_config(path):
    with open(path) as f:
        data = f.read()
    return data


def main():
    cfg = read_config("app.cfg")
    print(cfg)
