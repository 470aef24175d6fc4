from tools import *

helper()
