scenario_results = {}
progress_state = {}
