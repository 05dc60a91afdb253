import os
import json


def read_config(path):
    with open(path) as f:
        data = json.load(f)
    return data


def main():
    cfg = read_config("app.cfg")
    print(json.dumps(cfg, indent=2))
