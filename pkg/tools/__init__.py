# where: tools/__init__.py
# what: Package marker for the phylotope command tools.
# why: Keeps Python aware of the tools namespace without auto-import side effects.
