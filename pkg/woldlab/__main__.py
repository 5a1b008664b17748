from woldlab.cli import main

main()
