from bs4 import BeautifulSoup
soup = BeautifulSoup(state, 'html.parser')
preference = 'shortest' if 'shortest' in task else 'cheapest'
best_value = float('inf')
best_price = None
# Loop through all the available flights
for flight in soup.find_all("div", class_="flight"):
    price = int(flight.find("button", class_="flight-price")["data-price"])
    if preference == 'cheapest':
        value = price
    else:
        # durations read like "2h 35m"
        parts = flight.find("div", class_="time-duration").text.split()
        value = int(parts[0][:-1]) * 60 + int(parts[1][:-1])
    if value < best_value:
        best_value = value
        best_price = price
obs = f'The price of the {preference} one-way flight is ${best_price}'
