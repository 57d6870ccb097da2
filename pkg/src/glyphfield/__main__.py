from glyphfield.cli import main
import sys
sys.exit(main())
