#!/usr/bin/env python3
# Copyright 2026 The eigencent Authors | http://www.eclipse.org/legal/epl-v20.html
from centrality import cli

if __name__ == '__main__':
    raise SystemExit(cli.run())
