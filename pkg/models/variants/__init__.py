# QCH/QLk variant grid
