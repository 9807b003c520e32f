# where: main.py
# what: Defines the entrypoint for the phylotope command-line tools.
# why: `python main.py <command>` runs the same click group as the installed console script.

from tools.cli import main

if __name__ == '__main__':
    main()
