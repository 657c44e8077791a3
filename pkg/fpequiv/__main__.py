"""Allow ``python -m fpequiv``."""
from .cli import main

if __name__ == "__main__":
    main()
