from fdp.cli import main

main()
