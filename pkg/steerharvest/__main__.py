from steerharvest.main import main

raise SystemExit(main())
