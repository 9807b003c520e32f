# where: phylotope/__init__.py
# what: Package marker for the phylotope counting library.
# why: Keeps imports explicit; callers pull what they need from the submodules.
