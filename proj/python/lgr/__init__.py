from lgr._lgr import *  # noqa: F401,F403
